#include "protoseg/tensor_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "protoseg/ops.hpp"

namespace protoseg {

namespace {

constexpr char kTensorMagic[4] = {'F', 'M', 'A', 'P'};
constexpr char kMaskMagic[4] = {'B', 'M', 'S', 'K'};
constexpr std::uint8_t kVersion = 0x01;

[[noreturn]] void fail(const std::string& context, const std::string& what) {
  throw std::runtime_error(context + ": " + what);
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32_le(std::istream& in, const std::string& context) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) fail(context, "truncated header");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) |
         (static_cast<std::uint32_t>(bytes[3]) << 24);
}

std::vector<Index> read_header(std::istream& in, const char (&magic)[4],
                               const std::string& context) {
  char got[4];
  if (!in.read(got, 4)) fail(context, "truncated magic");
  if (std::memcmp(got, magic, 4) != 0) fail(context, "bad magic bytes");
  char version = 0;
  if (!in.get(version)) fail(context, "truncated version");
  if (static_cast<std::uint8_t>(version) != kVersion) fail(context, "unsupported version");
  char rank_byte = 0;
  if (!in.get(rank_byte)) fail(context, "truncated rank");
  const int rank = static_cast<std::uint8_t>(rank_byte);
  if (rank < 1 || rank > 3) fail(context, "rank must be 1..3");
  std::vector<Index> dims;
  for (int i = 0; i < rank; ++i) {
    const std::uint32_t d = get_u32_le(in, context);
    if (d == 0) fail(context, "zero dimension");
    dims.push_back(static_cast<Index>(d));
  }
  return dims;
}

void write_header(std::ostream& out, const char (&magic)[4], const std::vector<Index>& dims) {
  out.write(magic, 4);
  out.put(static_cast<char>(kVersion));
  out.put(static_cast<char>(dims.size()));
  for (Index d : dims) put_u32_le(out, static_cast<std::uint32_t>(d));
}

void expect_eof(std::istream& in, const std::string& context) {
  if (in.peek() != std::char_traits<char>::eof()) fail(context, "trailing bytes");
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& tensor) {
  write_header(out, kTensorMagic, tensor.dims());
  for (Index i = 0; i < tensor.size(); ++i) {
    const float f = static_cast<float>(tensor.data()(i));
    if (!std::isfinite(f))
      throw std::runtime_error("write_tensor: value does not fit the 32-bit file format");
    put_u32_le(out, std::bit_cast<std::uint32_t>(f));
  }
}

Tensor read_tensor(std::istream& in, const std::string& context) {
  const std::vector<Index> dims = read_header(in, kTensorMagic, context);
  Index count = 1;
  for (Index d : dims) count *= d;
  Vector data(count);
  for (Index i = 0; i < count; ++i)
    data(i) = static_cast<double>(std::bit_cast<float>(get_u32_le(in, context)));
  expect_eof(in, context);
  if (!data.array().isFinite().all()) fail(context, "non-finite payload");
  return Tensor(dims, std::move(data));
}

void write_mask(std::ostream& out, const BinaryMask& mask) {
  write_header(out, kMaskMagic, {mask.height(), mask.width()});
  out.write(reinterpret_cast<const char*>(mask.values().data()),
            static_cast<std::streamsize>(mask.size()));
}

BinaryMask read_mask(std::istream& in, const std::string& context) {
  const std::vector<Index> dims = read_header(in, kMaskMagic, context);
  if (dims.size() != 2) fail(context, "mask rank must be 2");
  MaskMatrix m(dims[0], dims[1]);
  if (!in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size())))
    fail(context, "truncated payload");
  expect_eof(in, context);
  if (!(m.array() <= 1).all()) fail(context, "mask payload outside {0,1}");
  return BinaryMask(std::move(m));
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
  return in;
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  auto out = open_out(path);
  write_tensor(out, tensor);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Tensor read_tensor(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_tensor(in, path.string());
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  auto out = open_out(path);
  write_mask(out, mask);
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

BinaryMask read_mask(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_mask(in, path.string());
}

namespace {

std::vector<std::uint8_t> to_gray(const ScalarMap& map) {
  const double lo = map.values().minCoeff();
  const double hi = map.values().maxCoeff();
  const double scale = hi > lo ? 255.0 / (hi - lo) : 0.0;
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(map.size()));
  for (Index y = 0; y < map.height(); ++y)
    for (Index x = 0; x < map.width(); ++x)
      gray[static_cast<std::size_t>(y * map.width() + x)] =
          static_cast<std::uint8_t>(std::lround((map(y, x) - lo) * scale));
  return gray;
}

void write_pnm_header(std::ostream& out, const char* kind, Index h, Index w) {
  out << kind << "\n" << w << " " << h << "\n255\n";
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const ScalarMap& map) {
  auto out = open_out(path);
  write_pnm_header(out, "P5", map.height(), map.width());
  const auto gray = to_gray(map);
  out.write(reinterpret_cast<const char*>(gray.data()),
            static_cast<std::streamsize>(gray.size()));
}

void write_pgm(const std::filesystem::path& path, const BinaryMask& mask) {
  auto out = open_out(path);
  write_pnm_header(out, "P5", mask.height(), mask.width());
  for (Index y = 0; y < mask.height(); ++y)
    for (Index x = 0; x < mask.width(); ++x) out.put(mask(y, x) ? '\xff' : '\0');
}

void write_ppm_overlay(const std::filesystem::path& path, const ScalarMap& base,
                       const BinaryMask& pred, const BinaryMask* truth) {
  detail::require(base.height() == pred.height() && base.width() == pred.width(),
                  "write_ppm_overlay: dims differ");
  if (truth)
    detail::require(truth->height() == pred.height() && truth->width() == pred.width(),
                    "write_ppm_overlay: truth dims differ");

  auto out = open_out(path);
  write_pnm_header(out, "P6", base.height(), base.width());
  const auto gray = to_gray(base);
  for (Index y = 0; y < base.height(); ++y) {
    for (Index x = 0; x < base.width(); ++x) {
      const std::uint8_t g = gray[static_cast<std::size_t>(y * base.width() + x)];
      std::uint8_t rgb[3] = {g, g, g};
      const bool p = pred(y, x) != 0;
      if (truth) {
        const bool t = (*truth)(y, x) != 0;
        if (p && t) rgb[1] = 255;           // hit: green
        else if (p && !t) rgb[0] = 255;     // false positive: red
        else if (!p && t) rgb[2] = 255;     // miss: blue
      } else if (p) {
        rgb[1] = 255;
      }
      out.write(reinterpret_cast<const char*>(rgb), 3);
    }
  }
}

void write_episode(const std::filesystem::path& dir, const Episode& episode) {
  episode.validate();
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < episode.supports.size(); ++k) {
    const std::string stem = "support" + std::to_string(k);
    write_tensor(dir / (stem + ".fmap"), Tensor::from(episode.supports[k].features));
    write_mask(dir / (stem + ".bmsk"), episode.supports[k].mask);
  }
  write_tensor(dir / "query.fmap", Tensor::from(episode.query));
  if (episode.truth) write_mask(dir / "truth.bmsk", *episode.truth);
}

Episode read_episode(const std::filesystem::path& dir) {
  Episode ep;
  for (std::size_t k = 0;; ++k) {
    const std::filesystem::path features = dir / ("support" + std::to_string(k) + ".fmap");
    if (!std::filesystem::exists(features)) break;
    const std::filesystem::path mask = dir / ("support" + std::to_string(k) + ".bmsk");
    ep.supports.push_back({read_tensor(features).to_feature_map(), read_mask(mask)});
  }
  if (ep.supports.empty())
    throw std::runtime_error(dir.string() + ": no support0.fmap found");
  ep.query = read_tensor(dir / "query.fmap").to_feature_map();
  if (std::filesystem::exists(dir / "truth.bmsk")) ep.truth = read_mask(dir / "truth.bmsk");
  ep.validate();
  return ep;
}

namespace {

std::string episode_dir_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "ep%04d", index);
  return buf;
}

}  // namespace

void write_suite(const std::filesystem::path& dir, const std::vector<Episode>& episodes,
                 const std::string& manifest_json) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < episodes.size(); ++i)
    write_episode(dir / episode_dir_name(static_cast<int>(i)), episodes[i]);
  std::ofstream manifest(dir / "suite.json");
  if (!manifest) throw std::runtime_error((dir / "suite.json").string() + ": cannot write");
  manifest << manifest_json << "\n";
}

std::vector<Episode> read_suite(const std::filesystem::path& dir, int max_episodes) {
  std::vector<Episode> out;
  for (int i = 0; max_episodes < 0 || i < max_episodes; ++i) {
    const std::filesystem::path ep_dir = dir / episode_dir_name(i);
    if (!std::filesystem::exists(ep_dir)) break;
    out.push_back(read_episode(ep_dir));
  }
  if (out.empty()) throw std::runtime_error(dir.string() + ": no ep0000 directory found");
  return out;
}

}  // namespace protoseg
