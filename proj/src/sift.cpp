#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

#include "mosaic/error.hpp"
#include "mosaic/features.hpp"

namespace mosaic {

namespace {

constexpr int kRefineSteps = 5;
constexpr int kOrientationBins = 36;
constexpr double kOrientationSigmaFactor = 1.5;
constexpr double kOrientationRadiusFactor = 3.0;
constexpr double kOrientationPeakRatio = 0.8;
constexpr int kDescWidth = 4;
constexpr int kDescBins = 8;
constexpr double kDescScaleFactor = 3.0;
constexpr float kDescClamp = 0.2f;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Candidate {
  int octave;
  int level;     // integer DoG level after refinement
  int x, y;      // integer octave position after refinement
  double ox, oy, os;  // sub-pixel offsets
  double contrast;
};

bool is_extremum(const std::vector<Plane>& dog, int l, int x, int y) {
  const float v = dog[static_cast<std::size_t>(l)].at(x, y);
  if (v > 0) {
    for (int dl = -1; dl <= 1; ++dl) {
      const Plane& p = dog[static_cast<std::size_t>(l + dl)];
      for (int dy = -1; dy <= 1; ++dy) {
        const float* r = p.row(y + dy);
        if (r[x - 1] > v || r[x] > v || r[x + 1] > v) return false;
      }
    }
  } else {
    for (int dl = -1; dl <= 1; ++dl) {
      const Plane& p = dog[static_cast<std::size_t>(l + dl)];
      for (int dy = -1; dy <= 1; ++dy) {
        const float* r = p.row(y + dy);
        if (r[x - 1] < v || r[x] < v || r[x + 1] < v) return false;
      }
    }
  }
  return true;
}

// Solves the 3x3 system H * x = b by Cramer's rule; false if singular.
bool solve3(const double h[3][3], const double b[3], double x[3]) {
  const double det = h[0][0] * (h[1][1] * h[2][2] - h[1][2] * h[2][1]) -
                     h[0][1] * (h[1][0] * h[2][2] - h[1][2] * h[2][0]) +
                     h[0][2] * (h[1][0] * h[2][1] - h[1][1] * h[2][0]);
  if (std::abs(det) < 1e-18) return false;
  for (int c = 0; c < 3; ++c) {
    double m[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m[i][j] = (j == c) ? b[i] : h[i][j];
    x[c] = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
            m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
            m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])) /
           det;
  }
  return true;
}

// Quadratic refinement in (x, y, scale) followed by contrast and edge tests.
bool refine(const ScaleSpace& ss, const SiftParams& params, int o, int l, int x, int y,
            Candidate& out) {
  const auto& dog = ss.dogs[static_cast<std::size_t>(o)];
  const int w = dog[0].width, h = dog[0].height;
  const int s = ss.scales_per_octave;
  double off[3] = {0, 0, 0};
  double grad[3] = {0, 0, 0};
  bool converged = false;
  for (int step = 0; step < kRefineSteps; ++step) {
    const Plane& prev = dog[static_cast<std::size_t>(l - 1)];
    const Plane& cur = dog[static_cast<std::size_t>(l)];
    const Plane& next = dog[static_cast<std::size_t>(l + 1)];
    const double v = cur.at(x, y);
    grad[0] = 0.5 * (cur.at(x + 1, y) - cur.at(x - 1, y));
    grad[1] = 0.5 * (cur.at(x, y + 1) - cur.at(x, y - 1));
    grad[2] = 0.5 * (next.at(x, y) - prev.at(x, y));
    double hess[3][3];
    hess[0][0] = cur.at(x + 1, y) + cur.at(x - 1, y) - 2 * v;
    hess[1][1] = cur.at(x, y + 1) + cur.at(x, y - 1) - 2 * v;
    hess[2][2] = next.at(x, y) + prev.at(x, y) - 2 * v;
    hess[0][1] = hess[1][0] = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) -
                                      cur.at(x + 1, y - 1) + cur.at(x - 1, y - 1));
    hess[0][2] = hess[2][0] = 0.25 * (next.at(x + 1, y) - next.at(x - 1, y) -
                                      prev.at(x + 1, y) + prev.at(x - 1, y));
    hess[1][2] = hess[2][1] = 0.25 * (next.at(x, y + 1) - next.at(x, y - 1) -
                                      prev.at(x, y + 1) + prev.at(x, y - 1));
    const double neg[3] = {-grad[0], -grad[1], -grad[2]};
    if (!solve3(hess, neg, off)) return false;
    if (std::abs(off[0]) < 0.5 && std::abs(off[1]) < 0.5 && std::abs(off[2]) < 0.5) {
      converged = true;
      break;
    }
    if (std::abs(off[0]) > 1e6 || std::abs(off[1]) > 1e6 || std::abs(off[2]) > 1e6) return false;
    x += static_cast<int>(std::lround(off[0]));
    y += static_cast<int>(std::lround(off[1]));
    l += static_cast<int>(std::lround(off[2]));
    if (l < 1 || l > s || x < kSiftBorder || x >= w - kSiftBorder || y < kSiftBorder ||
        y >= h - kSiftBorder) {
      return false;
    }
  }
  if (!converged) return false;

  const Plane& cur = dog[static_cast<std::size_t>(l)];
  const double contrast =
      cur.at(x, y) + 0.5 * (grad[0] * off[0] + grad[1] * off[1] + grad[2] * off[2]);
  if (std::abs(contrast) < params.contrast_threshold) return false;

  const double v = cur.at(x, y);
  const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - 2 * v;
  const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - 2 * v;
  const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) +
                             cur.at(x - 1, y - 1));
  const double tr = dxx + dyy;
  const double det = dxx * dyy - dxy * dxy;
  const double r = params.edge_ratio;
  if (det <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det) return false;

  const double fx = x + off[0], fy = y + off[1];
  if (fx < kSiftBorder || fx > w - 1 - kSiftBorder || fy < kSiftBorder ||
      fy > h - 1 - kSiftBorder) {
    return false;
  }
  out = {o, l, x, y, off[0], off[1], off[2], std::abs(contrast)};
  return true;
}

// Dominant gradient orientations around (x, y) on a Gaussian plane.
std::vector<double> orientations(const Plane& g, int x, int y, double sigma) {
  const double sw = kOrientationSigmaFactor * sigma;
  const int radius = static_cast<int>(std::lround(kOrientationRadiusFactor * sw));
  const double inv2s2 = -1.0 / (2.0 * sw * sw);
  double hist[kOrientationBins] = {};
  for (int dy = -radius; dy <= radius; ++dy) {
    const int yy = y + dy;
    if (yy <= 0 || yy >= g.height - 1) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int xx = x + dx;
      if (xx <= 0 || xx >= g.width - 1) continue;
      const double gx = g.at(xx + 1, yy) - g.at(xx - 1, yy);
      const double gy = g.at(xx, yy + 1) - g.at(xx, yy - 1);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double ang = std::atan2(gy, gx);
      if (ang < 0) ang += kTwoPi;
      int bin = static_cast<int>(std::floor(ang * kOrientationBins / kTwoPi));
      if (bin >= kOrientationBins) bin -= kOrientationBins;
      hist[bin] += mag * std::exp((dx * dx + dy * dy) * inv2s2);
    }
  }
  double smooth[kOrientationBins];
  for (int i = 0; i < kOrientationBins; ++i) {
    auto at = [&](int k) { return hist[(k + kOrientationBins) % kOrientationBins]; };
    smooth[i] = (at(i - 2) + at(i + 2)) * (1.0 / 16) + (at(i - 1) + at(i + 1)) * (4.0 / 16) +
                at(i) * (6.0 / 16);
  }
  const double peak = *std::max_element(smooth, smooth + kOrientationBins);
  std::vector<double> out;
  if (peak <= 0) return out;
  for (int i = 0; i < kOrientationBins; ++i) {
    const double l = smooth[(i + kOrientationBins - 1) % kOrientationBins];
    const double r = smooth[(i + 1) % kOrientationBins];
    const double c = smooth[i];
    if (c > l && c > r && c >= kOrientationPeakRatio * peak) {
      const double shift = 0.5 * (l - r) / (l - 2 * c + r);
      double ang = (i + 0.5 + shift) * kTwoPi / kOrientationBins;
      ang = std::fmod(ang + kTwoPi, kTwoPi);
      if (ang >= kTwoPi) ang = 0.0;
      out.push_back(ang);
    }
  }
  return out;
}

// 4x4 spatial x 8 orientation histogram with trilinear binning.
bool describe(const Plane& g, double x, double y, double sigma, double angle, float* desc) {
  constexpr int d = kDescWidth, n = kDescBins;
  float hist[d][d][n] = {};
  const double hist_width = kDescScaleFactor * sigma;
  int radius = static_cast<int>(std::lround(hist_width * std::sqrt(2.0) * (d + 1) * 0.5));
  radius = std::min(radius, static_cast<int>(std::sqrt(double(g.width) * g.width +
                                                       double(g.height) * g.height)));
  const double cos_t = std::cos(angle) / hist_width;
  const double sin_t = std::sin(angle) / hist_width;
  const double inv2s2 = -1.0 / (0.5 * d * d);  // window sigma d/2 in bin units
  const int cx = static_cast<int>(std::lround(x)), cy = static_cast<int>(std::lround(y));

  for (int i = -radius; i <= radius; ++i) {
    const int yy = cy + i;
    if (yy <= 0 || yy >= g.height - 1) continue;
    for (int j = -radius; j <= radius; ++j) {
      const int xx = cx + j;
      if (xx <= 0 || xx >= g.width - 1) continue;
      // Offset rotated into the keypoint frame, in bin units.
      const double c_rot = j * cos_t + i * sin_t;
      const double r_rot = -j * sin_t + i * cos_t;
      const double rbin = r_rot + d / 2.0 - 0.5;
      const double cbin = c_rot + d / 2.0 - 0.5;
      if (rbin <= -1 || rbin >= d || cbin <= -1 || cbin >= d) continue;
      const double gx = g.at(xx + 1, yy) - g.at(xx - 1, yy);
      const double gy = g.at(xx, yy + 1) - g.at(xx, yy - 1);
      const double mag = std::sqrt(gx * gx + gy * gy);
      if (mag == 0.0) continue;
      double ori = std::atan2(gy, gx) - angle;
      ori = std::fmod(ori, kTwoPi);
      if (ori < 0) ori += kTwoPi;
      const double obin = ori * n / kTwoPi;
      const double weight = mag * std::exp((c_rot * c_rot + r_rot * r_rot) * inv2s2);

      const int r0 = static_cast<int>(std::floor(rbin));
      const int c0 = static_cast<int>(std::floor(cbin));
      int o0 = static_cast<int>(std::floor(obin));
      const double dr = rbin - r0, dc = cbin - c0, dor = obin - o0;
      o0 %= n;
      for (int a = 0; a < 2; ++a) {
        const int rr = r0 + a;
        if (rr < 0 || rr >= d) continue;
        const double wr = a ? dr : 1 - dr;
        for (int b = 0; b < 2; ++b) {
          const int cc = c0 + b;
          if (cc < 0 || cc >= d) continue;
          const double wc = b ? dc : 1 - dc;
          for (int k = 0; k < 2; ++k) {
            const int oo = (o0 + k) % n;
            const double wo = k ? dor : 1 - dor;
            hist[rr][cc][oo] += static_cast<float>(weight * wr * wc * wo);
          }
        }
      }
    }
  }

  double norm = 0;
  const float* flat = &hist[0][0][0];
  for (int i = 0; i < d * d * n; ++i) norm += double(flat[i]) * flat[i];
  norm = std::sqrt(norm);
  if (norm <= 0) return false;
  const float limit = static_cast<float>(kDescClamp * norm);
  double norm2 = 0;
  for (int i = 0; i < d * d * n; ++i) {
    desc[i] = std::min(flat[i], limit);
    norm2 += double(desc[i]) * desc[i];
  }
  norm2 = std::sqrt(norm2);
  for (int i = 0; i < d * d * n; ++i) desc[i] = static_cast<float>(desc[i] / norm2);
  return true;
}

}  // namespace

FeatureSet detect_sift(const Image& img, const SiftParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  if (std::min(img.width, img.height) < 64) {
    throw Error(ErrorKind::ImageTooSmall, "detect_sift requires at least 64x64 pixels");
  }
  const Plane luma = luma_plane(img);
  const ScaleSpace ss = build_scale_space(luma, params.octaves, params.scales_per_octave,
                                          params.sigma0, params.assumed_blur);
  const int s = ss.scales_per_octave;
  const float prelim = static_cast<float>(0.5 * params.contrast_threshold);

  struct Raw {
    Keypoint kp;
    std::array<float, 128> desc;
  };
  std::vector<Raw> raw;

  for (int o = 0; o < ss.octaves; ++o) {
    const auto& dog = ss.dogs[static_cast<std::size_t>(o)];
    const int w = dog[0].width, h = dog[0].height;
    const double octave_scale = std::ldexp(1.0, o);
    for (int l = 1; l <= s; ++l) {
      const Plane& cur = dog[static_cast<std::size_t>(l)];
      for (int y = kSiftBorder; y < h - kSiftBorder; ++y) {
        const float* row = cur.row(y);
        for (int x = kSiftBorder; x < w - kSiftBorder; ++x) {
          if (std::abs(row[x]) <= prelim) continue;
          if (!is_extremum(dog, l, x, y)) continue;
          Candidate c;
          if (!refine(ss, params, o, l, x, y, c)) continue;

          const double sigma_oct = ss.level_sigma(0) * std::pow(2.0, (c.level + c.os) / s);
          const Plane& g = ss.gaussians[static_cast<std::size_t>(o)][static_cast<std::size_t>(c.level)];
          const double fx = c.x + c.ox, fy = c.y + c.oy;
          for (double ang : orientations(g, c.x, c.y, sigma_oct)) {
            Raw r;
            if (!describe(g, fx, fy, sigma_oct, ang, r.desc.data())) continue;
            r.kp.x = static_cast<float>(fx * octave_scale);
            r.kp.y = static_cast<float>(fy * octave_scale);
            r.kp.scale = static_cast<float>(sigma_oct * octave_scale);
            r.kp.orientation = static_cast<float>(ang);
            if (r.kp.orientation >= static_cast<float>(kTwoPi)) r.kp.orientation = 0.0f;
            r.kp.response = static_cast<float>(c.contrast);
            r.kp.octave = o;
            raw.push_back(r);
          }
        }
      }
    }
  }

  std::vector<std::size_t> order(raw.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Keypoint& ka = raw[a].kp;
    const Keypoint& kb = raw[b].kp;
    if (ka.response != kb.response) return ka.response > kb.response;
    if (ka.y != kb.y) return ka.y < kb.y;
    return ka.x < kb.x;
  });
  if (params.max_keypoints > 0 && order.size() > static_cast<std::size_t>(params.max_keypoints)) {
    order.resize(static_cast<std::size_t>(params.max_keypoints));
  }

  FeatureSet fs;
  fs.kind = DescriptorKind::Float128;
  fs.keypoints.reserve(order.size());
  fs.float_descriptors.reserve(order.size() * 128);
  for (std::size_t i : order) {
    fs.keypoints.push_back(raw[i].kp);
    fs.float_descriptors.insert(fs.float_descriptors.end(), raw[i].desc.begin(), raw[i].desc.end());
  }
  fs.extraction_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return fs;
}

}  // namespace mosaic
