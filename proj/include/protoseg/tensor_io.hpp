#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "protoseg/pipeline.hpp"
#include "protoseg/types.hpp"

namespace protoseg {

/// Binary tensor file: magic "FMAP", version byte 0x01, u8 rank, rank
/// little-endian u32 dims, then row-major (channel-major for rank 3) IEEE-754
/// 32-bit little-endian payload. Masks use magic "BMSK" with the same header
/// and one byte per value in {0, 1}.
///
/// Readers throw std::runtime_error with path context on malformed input;
/// writers refuse values that do not fit a 32-bit float.

void write_tensor(std::ostream& out, const Tensor& tensor);
Tensor read_tensor(std::istream& in, const std::string& context = "<stream>");
void write_tensor(const std::filesystem::path& path, const Tensor& tensor);
Tensor read_tensor(const std::filesystem::path& path);

void write_mask(std::ostream& out, const BinaryMask& mask);
BinaryMask read_mask(std::istream& in, const std::string& context = "<stream>");
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask read_mask(const std::filesystem::path& path);

/// 8-bit binary PGM (P5). Scalar maps are min-max scaled onto 0..255; masks
/// render 0/255.
void write_pgm(const std::filesystem::path& path, const ScalarMap& map);
void write_pgm(const std::filesystem::path& path, const BinaryMask& mask);

/// Binary PPM (P6): grayscale base with the predicted foreground tinted green;
/// with a truth mask, false positives tint red and misses blue.
void write_ppm_overlay(const std::filesystem::path& path, const ScalarMap& base,
                       const BinaryMask& pred, const BinaryMask* truth = nullptr);

/// Episode directory layout: support%d.fmap / support%d.bmsk pairs,
/// query.fmap, and optionally truth.bmsk.
void write_episode(const std::filesystem::path& dir, const Episode& episode);
Episode read_episode(const std::filesystem::path& dir);

/// Suite = ep%04d subdirectories plus a suite.json manifest.
void write_suite(const std::filesystem::path& dir, const std::vector<Episode>& episodes,
                 const std::string& manifest_json);
std::vector<Episode> read_suite(const std::filesystem::path& dir, int max_episodes = -1);

}  // namespace protoseg
