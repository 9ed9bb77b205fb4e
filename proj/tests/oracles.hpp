#pragma once

// Naive reference implementations used as independent oracles by the unit and
// acceptance tests. Everything here works on plain std::vector buffers with
// index loops on purpose: no Eigen, no shared code with src/.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

// Row-major H×W buffer.
struct Grid {
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> v;

  double at(std::size_t y, std::size_t x) const { return v[y * w + x]; }
  double& at(std::size_t y, std::size_t x) { return v[y * w + x]; }
};

// Channel-major C×H×W buffer.
struct Cube {
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;
  std::vector<double> v;

  double at(std::size_t ch, std::size_t y, std::size_t x) const {
    return v[(ch * h + y) * w + x];
  }
  double& at(std::size_t ch, std::size_t y, std::size_t x) { return v[(ch * h + y) * w + x]; }
};

inline Grid adaptive_avg_pool(const Grid& in, std::size_t oh, std::size_t ow) {
  Grid out{oh, ow, std::vector<double>(oh * ow, 0.0)};
  for (std::size_t i = 0; i < oh; ++i) {
    const std::size_t r0 = (i * in.h) / oh;
    const std::size_t r1 = ((i + 1) * in.h + oh - 1) / oh;
    for (std::size_t j = 0; j < ow; ++j) {
      const std::size_t c0 = (j * in.w) / ow;
      const std::size_t c1 = ((j + 1) * in.w + ow - 1) / ow;
      double sum = 0.0;
      for (std::size_t y = r0; y < r1; ++y)
        for (std::size_t x = c0; x < c1; ++x) sum += in.at(y, x);
      out.at(i, j) = sum / (static_cast<double>(r1 - r0) * static_cast<double>(c1 - c0));
    }
  }
  return out;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  double c = dot / (std::sqrt(na) * std::sqrt(nb) + 1e-7);
  if (c > 1.0) c = 1.0;
  if (c < -1.0) c = -1.0;
  return c;
}

inline std::vector<double> pixel_vector(const Cube& q, std::size_t y, std::size_t x) {
  std::vector<double> out(q.c);
  for (std::size_t ch = 0; ch < q.c; ++ch) out[ch] = q.at(ch, y, x);
  return out;
}

// One cosine map per prototype, ordered as given.
inline std::vector<Grid> similarity_stack(const Cube& query,
                                          const std::vector<std::vector<double>>& protos) {
  std::vector<Grid> maps;
  for (const auto& p : protos) {
    Grid g{query.h, query.w, std::vector<double>(query.h * query.w, 0.0)};
    for (std::size_t y = 0; y < query.h; ++y)
      for (std::size_t x = 0; x < query.w; ++x) g.at(y, x) = cosine(pixel_vector(query, y, x), p);
    maps.push_back(std::move(g));
  }
  return maps;
}

inline Grid probability_map(const std::vector<Grid>& stack) {
  Grid out{stack[0].h, stack[0].w, std::vector<double>(stack[0].v.size(), 0.0)};
  for (const auto& g : stack)
    for (std::size_t i = 0; i < g.v.size(); ++i) out.v[i] += g.v[i];
  return out;
}

// Per-pixel argmax with ties to the lowest index.
inline std::vector<std::size_t> guide_indices(const std::vector<Grid>& stack) {
  std::vector<std::size_t> out(stack[0].v.size(), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < stack.size(); ++k)
      if (stack[k].v[i] > stack[best].v[i]) best = k;
    out[i] = best;
  }
  return out;
}

inline Cube gather(const std::vector<std::size_t>& guide,
                   const std::vector<std::vector<double>>& protos, std::size_t h, std::size_t w) {
  Cube out{protos[0].size(), h, w, std::vector<double>(protos[0].size() * h * w, 0.0)};
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const auto& p = protos[guide[y * w + x]];
      for (std::size_t ch = 0; ch < p.size(); ++ch) out.at(ch, y, x) = p[ch];
    }
  return out;
}

// Masked mean of the query features; falls back to the global mean when the
// mask is empty.
inline std::vector<double> query_prototype(const Cube& query, const std::vector<int>& mask) {
  std::vector<double> sum(query.c, 0.0);
  double count = 0.0;
  for (std::size_t y = 0; y < query.h; ++y)
    for (std::size_t x = 0; x < query.w; ++x)
      if (mask[y * query.w + x] != 0) {
        for (std::size_t ch = 0; ch < query.c; ++ch) sum[ch] += query.at(ch, y, x);
        count += 1.0;
      }
  if (count == 0.0) {
    for (std::size_t y = 0; y < query.h; ++y)
      for (std::size_t x = 0; x < query.w; ++x)
        for (std::size_t ch = 0; ch < query.c; ++ch) sum[ch] += query.at(ch, y, x);
    count = static_cast<double>(query.h * query.w);
  }
  for (auto& s : sum) s /= count;
  return sum;
}

}  // namespace oracle
