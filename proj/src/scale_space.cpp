#include <algorithm>
#include <cmath>

#include "mosaic/error.hpp"
#include "mosaic/features.hpp"

namespace mosaic {

namespace {

int mirror(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

std::vector<float> gaussian_kernel(double sigma, int radius) {
  std::vector<float> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = static_cast<float>(v);
    sum += v;
  }
  for (auto& v : k) v = static_cast<float>(v / sum);
  return k;
}

Plane decimate(const Plane& src) {
  Plane out((src.width + 1) / 2, (src.height + 1) / 2);
  for (int y = 0; y < out.height; ++y) {
    const float* s = src.row(2 * y);
    float* d = out.row(y);
    for (int x = 0; x < out.width; ++x) d[x] = s[2 * x];
  }
  return out;
}

}  // namespace

// Both passes accumulate weighted differences from the centre sample, so a
// constant input reproduces itself bit-exactly.
Plane gaussian_blur(const Plane& src, double sigma) {
  if (sigma <= 0.0) return src;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const auto k = gaussian_kernel(sigma, radius);
  const int w = src.width, h = src.height;

  Plane tmp(w, h);
  std::vector<float> pad(static_cast<std::size_t>(w + 2 * radius));
  std::vector<float> acc(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    const float* s = src.row(y);
    for (int i = 0; i < w + 2 * radius; ++i) pad[i] = s[mirror(i - radius, w)];
    std::fill(acc.begin(), acc.end(), 0.0f);
    const float* centre = pad.data() + radius;
    for (int t = 1; t <= radius; ++t) {
      const float wt = k[static_cast<std::size_t>(radius + t)];
      const float* l = centre - t;
      const float* r = centre + t;
      for (int x = 0; x < w; ++x) acc[x] += wt * ((l[x] - centre[x]) + (r[x] - centre[x]));
    }
    float* d = tmp.row(y);
    for (int x = 0; x < w; ++x) d[x] = centre[x] + acc[x];
  }

  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    std::fill(acc.begin(), acc.end(), 0.0f);
    const float* centre = tmp.row(y);
    for (int t = 1; t <= radius; ++t) {
      const float wt = k[static_cast<std::size_t>(radius + t)];
      const float* l = tmp.row(mirror(y - t, h));
      const float* r = tmp.row(mirror(y + t, h));
      for (int x = 0; x < w; ++x) acc[x] += wt * ((l[x] - centre[x]) + (r[x] - centre[x]));
    }
    float* d = out.row(y);
    for (int x = 0; x < w; ++x) d[x] = centre[x] + acc[x];
  }
  return out;
}

double ScaleSpace::level_sigma(int level) const {
  return sigma0 * std::pow(2.0, static_cast<double>(level) / scales_per_octave);
}

ScaleSpace build_scale_space(const Plane& luma, int octaves, int scales_per_octave, double sigma0,
                             double assumed_blur) {
  if (octaves < 1 || scales_per_octave < 1 || !(sigma0 > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "build_scale_space: invalid parameters");
  }
  const int min_dim = std::min(luma.width, luma.height);
  while (octaves > 1 && min_dim < (1 << octaves) * 16) --octaves;

  ScaleSpace ss;
  ss.octaves = octaves;
  ss.scales_per_octave = scales_per_octave;
  ss.sigma0 = sigma0;

  const int levels = scales_per_octave + 3;
  std::vector<double> increments(static_cast<std::size_t>(levels), 0.0);
  for (int i = 1; i < levels; ++i) {
    const double prev = ss.level_sigma(i - 1), cur = ss.level_sigma(i);
    increments[static_cast<std::size_t>(i)] = std::sqrt(cur * cur - prev * prev);
  }

  const double base_sigma = std::sqrt(std::max(sigma0 * sigma0 - assumed_blur * assumed_blur, 0.01));
  ss.gaussians.resize(static_cast<std::size_t>(octaves));
  ss.dogs.resize(static_cast<std::size_t>(octaves));
  for (int o = 0; o < octaves; ++o) {
    auto& g = ss.gaussians[static_cast<std::size_t>(o)];
    g.reserve(static_cast<std::size_t>(levels));
    if (o == 0) {
      g.push_back(gaussian_blur(luma, base_sigma));
    } else {
      g.push_back(decimate(ss.gaussians[static_cast<std::size_t>(o - 1)]
                                       [static_cast<std::size_t>(scales_per_octave)]));
    }
    for (int i = 1; i < levels; ++i) {
      g.push_back(gaussian_blur(g.back(), increments[static_cast<std::size_t>(i)]));
    }
    auto& d = ss.dogs[static_cast<std::size_t>(o)];
    d.reserve(static_cast<std::size_t>(levels - 1));
    for (int i = 0; i + 1 < levels; ++i) {
      const Plane& a = g[static_cast<std::size_t>(i)];
      const Plane& b = g[static_cast<std::size_t>(i + 1)];
      Plane diff(a.width, a.height);
      for (std::size_t p = 0; p < diff.data.size(); ++p) diff.data[p] = b.data[p] - a.data[p];
      d.push_back(std::move(diff));
    }
  }
  return ss;
}

}  // namespace mosaic
