#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <vector>

#include "mosaic/error.hpp"
#include "mosaic/features.hpp"

namespace mosaic {

namespace {

constexpr int kRing[16][2] = {{0, -3}, {1, -3}, {2, -2}, {3, -1}, {3, 0},  {3, 1},  {2, 2},  {1, 3},
                              {0, 3},  {-1, 3}, {-2, 2}, {-3, 1}, {-3, 0}, {-3, -1}, {-2, -2}, {-1, -3}};
constexpr int kArc = 9;
constexpr int kPatchRadius = 15;
constexpr int kHarrisBlock = 7;
constexpr double kHarrisK = 0.04;

// True when 9 contiguous ring pixels are all brighter (or all darker) than
// the centre by more than t.
bool is_fast_corner(const int (&d)[16], int t) {
  int bright = 0, dark = 0;
  for (int i = 0; i < 16 + kArc - 1; ++i) {
    const int v = d[i & 15];
    bright = v > t ? bright + 1 : 0;
    dark = v < -t ? dark + 1 : 0;
    if (bright >= kArc || dark >= kArc) return true;
  }
  return false;
}

// Largest threshold for which the pixel still passes the 9-contiguous test.
// Window minima over 9 ring pixels are built from doubling runs 2, 4, 8.
int segment_score(const Image& img, int x, int y) {
  const int c = img.at(x, y);
  int lo[32], hi[32];
  for (int i = 0; i < 16; ++i) {
    lo[i] = lo[i + 16] = img.at(x + kRing[i][0], y + kRing[i][1]) - c;
    hi[i] = hi[i + 16] = -lo[i];
  }
  int lo2[32], hi2[32], lo4[32], hi4[32];
  for (int i = 0; i < 31; ++i) {
    lo2[i] = std::min(lo[i], lo[i + 1]);
    hi2[i] = std::min(hi[i], hi[i + 1]);
  }
  for (int i = 0; i < 29; ++i) {
    lo4[i] = std::min(lo2[i], lo2[i + 2]);
    hi4[i] = std::min(hi2[i], hi2[i + 2]);
  }
  int best = 0;
  for (int s = 0; s < 16; ++s) {
    const int l = std::min(std::min(lo4[s], lo4[s + 4]), lo[s + 8]);
    const int h = std::min(std::min(hi4[s], hi4[s + 4]), hi[s + 8]);
    best = std::max(best, std::max(l, h));
  }
  return best;
}

// Sobel gradients of a whole level, reused by every Harris evaluation.
struct Gradients {
  int width = 0;
  std::vector<int> ix, iy;
};

Gradients sobel_gradients(const Image& img) {
  Gradients g;
  g.width = img.width;
  g.ix.assign(img.data.size(), 0);
  g.iy.assign(img.data.size(), 0);
  for (int y = 1; y < img.height - 1; ++y) {
    for (int x = 1; x < img.width - 1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      g.ix[i] = (img.at(x + 1, y - 1) + 2 * img.at(x + 1, y) + img.at(x + 1, y + 1)) -
                (img.at(x - 1, y - 1) + 2 * img.at(x - 1, y) + img.at(x - 1, y + 1));
      g.iy[i] = (img.at(x - 1, y + 1) + 2 * img.at(x, y + 1) + img.at(x + 1, y + 1)) -
                (img.at(x - 1, y - 1) + 2 * img.at(x, y - 1) + img.at(x + 1, y - 1));
    }
  }
  return g;
}

double harris_response(const Gradients& g, int x, int y) {
  const int r = kHarrisBlock / 2;
  double a = 0, b = 0, c = 0;
  for (int yy = y - r; yy <= y + r; ++yy) {
    for (int xx = x - r; xx <= x + r; ++xx) {
      const std::size_t i = static_cast<std::size_t>(yy) * g.width + xx;
      const double ix = g.ix[i], iy = g.iy[i];
      a += ix * ix;
      b += iy * iy;
      c += ix * iy;
    }
  }
  const double norm = 1.0 / (4.0 * 255.0 * kHarrisBlock);
  const double n4 = norm * norm * norm * norm;
  return (a * b - c * c - kHarrisK * (a + b) * (a + b)) * n4;
}

double centroid_angle(const Image& img, int x, int y) {
  double m01 = 0, m10 = 0;
  for (int dy = -kPatchRadius; dy <= kPatchRadius; ++dy) {
    const int span = static_cast<int>(std::sqrt(double(kPatchRadius * kPatchRadius - dy * dy)));
    for (int dx = -span; dx <= span; ++dx) {
      const double v = img.at(x + dx, y + dy);
      m10 += dx * v;
      m01 += dy * v;
    }
  }
  double ang = std::atan2(m01, m10);
  if (ang < 0) ang += 2.0 * std::numbers::pi;
  if (ang >= 2.0 * std::numbers::pi) ang = 0.0;
  return ang;
}

int round_half_away(double v) { return static_cast<int>(v + std::copysign(0.5, v)); }

// 5x5 window sums of a level; zero within 2 pixels of the border.
struct BoxSums {
  int width = 0;
  std::vector<std::uint16_t> sum;

  explicit BoxSums(const Image& img) : width(img.width) {
    const int w = img.width, h = img.height;
    std::vector<std::uint16_t> rows(static_cast<std::size_t>(w) * h, 0);
    for (int y = 0; y < h; ++y) {
      const std::uint8_t* src = img.data.data() + static_cast<std::size_t>(y) * w;
      std::uint16_t* dst = rows.data() + static_cast<std::size_t>(y) * w;
      for (int x = 2; x < w - 2; ++x) dst[x] = src[x - 2] + src[x - 1] + src[x] + src[x + 1] + src[x + 2];
    }
    sum.assign(rows.size(), 0);
    for (int y = 2; y < h - 2; ++y) {
      std::uint16_t* dst = sum.data() + static_cast<std::size_t>(y) * w;
      const std::uint16_t* r0 = rows.data() + static_cast<std::size_t>(y - 2) * w;
      for (int x = 0; x < w; ++x) {
        dst[x] = static_cast<std::uint16_t>(r0[x] + r0[x + w] + r0[x + 2 * w] + r0[x + 3 * w] + r0[x + 4 * w]);
      }
    }
  }

  int at(int x, int y) const { return sum[static_cast<std::size_t>(y) * width + x]; }
};

// Each test compares 5x5 window sums at two rotated pattern offsets.
BinaryDescriptor describe(const BoxSums& box, int x, int y, double angle) {
  const double ca = std::cos(angle), sa = std::sin(angle);
  BinaryDescriptor bits{};
  const std::uint16_t* centre = box.sum.data() + static_cast<std::size_t>(y) * box.width + x;
  auto sample = [&](int px, int py) {
    const int rx = round_half_away(ca * px - sa * py);
    const int ry = round_half_away(sa * px + ca * py);
    return centre[static_cast<std::ptrdiff_t>(ry) * box.width + rx];
  };
  for (int i = 0; i < 256; ++i) {
    const auto& p = kOrbPattern[static_cast<std::size_t>(i)];
    if (sample(p[0], p[1]) < sample(p[2], p[3])) bits[static_cast<std::size_t>(i >> 6)] |= 1ull << (i & 63);
  }
  return bits;
}

}  // namespace

std::vector<FastCorner> fast9_corners(const Image& luma, int threshold, int border) {
  border = std::max(border, 3);
  const int w = luma.width, h = luma.height;
  std::vector<int> score(static_cast<std::size_t>(w) * h, 0);
  std::ptrdiff_t ring[16];
  for (int i = 0; i < 16; ++i) ring[i] = static_cast<std::ptrdiff_t>(kRing[i][1]) * w + kRing[i][0];
  // Row-wise branch-free prefilter: a 9-pixel arc holds at least one pixel of
  // every opposite ring pair, so each pair must offer a brighter (bit 0) or a
  // darker (bit 1) pixel.
  const int x0 = border, x1 = w - border, n = std::max(0, x1 - x0);
  std::vector<std::uint8_t> pass(static_cast<std::size_t>(n));
  for (int y = border; y < h - border; ++y) {
    const std::uint8_t* row = luma.data.data() + static_cast<std::size_t>(y) * w + x0;
    std::fill(pass.begin(), pass.end(), std::uint8_t{3});
    for (int i = 0; i < 8; ++i) {
      const std::uint8_t* pa = row + ring[i];
      const std::uint8_t* pb = row + ring[i + 8];
      for (int x = 0; x < n; ++x) {
        const int c = row[x];
        const int a = pa[x], b = pb[x];
        const int bright = (a > c + threshold) | (b > c + threshold);
        const int dark = (a < c - threshold) | (b < c - threshold);
        pass[static_cast<std::size_t>(x)] &= static_cast<std::uint8_t>(bright | (dark << 1));
      }
    }
    for (int x = 0; x < n; ++x) {
      if (!pass[static_cast<std::size_t>(x)]) continue;
      const std::uint8_t* p = row + x;
      const int c = *p;
      int d[16];
      for (int i = 0; i < 16; ++i) d[i] = p[ring[i]] - c;
      if (!is_fast_corner(d, threshold)) continue;
      score[static_cast<std::size_t>(y) * w + x0 + x] = segment_score(luma, x0 + x, y);
    }
  }
  std::vector<FastCorner> out;
  for (int y = border; y < h - border; ++y) {
    for (int x = border; x < w - border; ++x) {
      const int s = score[static_cast<std::size_t>(y) * w + x];
      if (s == 0) continue;
      bool keep = true;
      for (int dy = -1; dy <= 1 && keep; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int n = score[static_cast<std::size_t>(y + dy) * w + x + dx];
          // Ties resolve to the first pixel in raster order.
          const bool earlier = dy < 0 || (dy == 0 && dx < 0);
          if (n > s || (earlier && n == s)) {
            keep = false;
            break;
          }
        }
      }
      if (keep) out.push_back({x, y, s});
    }
  }
  return out;
}

FeatureSet detect_orb(const Image& img, const OrbParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  if (std::min(img.width, img.height) < 32) {
    throw Error(ErrorKind::ImageTooSmall, "detect_orb requires at least 32x32 pixels");
  }
  const Image base = to_luma(img);
  const int levels = std::max(1, params.levels);
  const double f = 1.0 / params.scale_factor;
  const double budget_unit = params.max_keypoints * (1.0 - f) / (1.0 - std::pow(f, levels));
  const int border = std::max(params.edge_threshold, kPatchRadius + 8);

  struct Candidate {
    Keypoint kp;
    BinaryDescriptor desc;
  };
  std::vector<Candidate> all;

  for (int level = 0; level < levels; ++level) {
    const double scale = std::pow(params.scale_factor, level);
    const int lw = static_cast<int>(std::floor(base.width / scale));
    const int lh = static_cast<int>(std::floor(base.height / scale));
    if (std::min(lw, lh) < 2 * border + 1) break;
    const Image lvl = level == 0 ? base : downscale(base, 1.0 / scale);
    const int quota = static_cast<int>(std::lround(budget_unit * std::pow(f, level)));
    if (quota <= 0) continue;

    struct Scored {
      int x, y;
      double harris;
    };
    std::vector<Scored> scored;
    const Gradients grad = sobel_gradients(lvl);
    for (const auto& c : fast9_corners(lvl, params.fast_threshold, border)) {
      const double r = harris_response(grad, c.x, c.y);
      if (r > 0) scored.push_back({c.x, c.y, r});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      if (a.harris != b.harris) return a.harris > b.harris;
      if (a.y != b.y) return a.y < b.y;
      return a.x < b.x;
    });
    if (scored.size() > static_cast<std::size_t>(quota)) scored.resize(static_cast<std::size_t>(quota));
    if (scored.empty()) continue;

    const BoxSums box(lvl);

    for (const auto& s : scored) {
      Candidate c;
      const double angle = centroid_angle(lvl, s.x, s.y);
      c.kp.x = static_cast<float>((s.x + 0.5) * scale - 0.5);
      c.kp.y = static_cast<float>((s.y + 0.5) * scale - 0.5);
      c.kp.scale = static_cast<float>(scale);
      c.kp.orientation = static_cast<float>(angle);
      if (c.kp.orientation >= static_cast<float>(2.0 * std::numbers::pi)) c.kp.orientation = 0.0f;
      c.kp.response = static_cast<float>(s.harris);
      c.kp.octave = level;
      c.desc = describe(box, s.x, s.y, angle);
      all.push_back(c);
    }
  }

  std::stable_sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    if (a.kp.response != b.kp.response) return a.kp.response > b.kp.response;
    if (a.kp.y != b.kp.y) return a.kp.y < b.kp.y;
    return a.kp.x < b.kp.x;
  });
  if (all.size() > static_cast<std::size_t>(params.max_keypoints)) {
    all.resize(static_cast<std::size_t>(params.max_keypoints));
  }

  FeatureSet fs;
  fs.kind = DescriptorKind::Binary256;
  fs.keypoints.reserve(all.size());
  fs.binary_descriptors.reserve(all.size());
  for (const auto& c : all) {
    fs.keypoints.push_back(c.kp);
    fs.binary_descriptors.push_back(c.desc);
  }
  fs.extraction_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return fs;
}

}  // namespace mosaic
