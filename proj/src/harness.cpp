#include "mosaic/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "mosaic/error.hpp"
#include "mosaic/io.hpp"

namespace mosaic {

namespace {

// Engine-level helpers so generated data does not depend on the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return (rng() >> 11) * (1.0 / 9007199254740992.0); }
double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }
double gaussian(std::mt19937_64& rng) {
  const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (a + 1) + 0xC2B2AE3D27D4EB4Full * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Smoothstep-interpolated lattice noise in [0, 1] with the given cell size.
class ValueNoise {
 public:
  ValueNoise(int width, int height, int cell, std::mt19937_64& rng)
      : cell_(cell), gw_(width / cell + 2), gh_(height / cell + 2),
        lattice_(static_cast<std::size_t>(gw_) * gh_) {
    for (auto& v : lattice_) v = static_cast<float>(uniform01(rng));
  }

  float at(int x, int y) const {
    const int gx = x / cell_, gy = y / cell_;
    const float fx = smooth(static_cast<float>(x % cell_) / cell_);
    const float fy = smooth(static_cast<float>(y % cell_) / cell_);
    const float a = node(gx, gy), b = node(gx + 1, gy), c = node(gx, gy + 1), d = node(gx + 1, gy + 1);
    return (a * (1 - fx) + b * fx) * (1 - fy) + (c * (1 - fx) + d * fx) * fy;
  }

 private:
  static float smooth(float t) { return t * t * (3 - 2 * t); }
  float node(int x, int y) const { return lattice_[static_cast<std::size_t>(y) * gw_ + x]; }

  int cell_, gw_, gh_;
  std::vector<float> lattice_;
};

void fill_noise(std::vector<float>& plane, int w, int h, std::mt19937_64& rng,
                const std::vector<std::pair<int, float>>& octaves) {
  plane.assign(static_cast<std::size_t>(w) * h, 0.0f);
  float total = 0.0f;
  for (const auto& [cell, amp] : octaves) {
    ValueNoise n(w, h, cell, rng);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) plane[static_cast<std::size_t>(y) * w + x] += amp * n.at(x, y);
    total += amp;
  }
  for (auto& v : plane) v /= total;
}

Point2 sample_point(const Homography& h, double x, double y) { return apply_homography(h, {x, y}); }

double bilinear(const Image& img, double x, double y, int c) {
  int ix = static_cast<int>(std::floor(x)), iy = static_cast<int>(std::floor(y));
  ix = std::clamp(ix, 0, img.width - 2);
  iy = std::clamp(iy, 0, img.height - 2);
  const double fx = x - ix, fy = y - iy;
  const double top = (1 - fx) * img.at(ix, iy, c) + fx * img.at(ix + 1, iy, c);
  const double bot = (1 - fx) * img.at(ix, iy + 1, c) + fx * img.at(ix + 1, iy + 1, c);
  return (1 - fy) * top + fy * bot;
}

}  // namespace

Image make_source(int width, int height, std::uint64_t seed) {
  if (width < 1024 || height < 1024) {
    throw Error(ErrorKind::InvalidArgument, "make_source: dimensions must be at least 1024x1024");
  }
  std::mt19937_64 rng(mix(seed, 1));
  std::vector<float> base, tint_r, tint_b;
  fill_noise(base, width, height, rng, {{96, 1.0f}, {48, 0.8f}, {24, 0.7f}, {12, 0.6f}, {6, 0.5f}, {3, 0.3f}});
  fill_noise(tint_r, width, height, rng, {{160, 1.0f}, {64, 0.5f}});
  fill_noise(tint_b, width, height, rng, {{160, 1.0f}, {64, 0.5f}});

  // Stretch the noise contrast around its mean.
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * width + x;
      const double l = 128.0 + 2.2 * 255.0 * (base[i] - 0.5);
      img.at(x, y, 0) = saturate_u8(l + 60.0 * (tint_r[i] - 0.5));
      img.at(x, y, 1) = saturate_u8(l);
      img.at(x, y, 2) = saturate_u8(l + 60.0 * (tint_b[i] - 0.5));
    }
  }

  auto paint = [&](int x, int y, const std::array<std::uint8_t, 3>& col) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    for (int c = 0; c < 3; ++c) img.at(x, y, c) = col[static_cast<std::size_t>(c)];
  };
  auto colour = [&] {
    const double v = uniform01(rng) < 0.5 ? uniform(rng, 0, 50) : uniform(rng, 205, 255);
    return std::array<std::uint8_t, 3>{saturate_u8(v + uniform(rng, -25, 25)), saturate_u8(v),
                                       saturate_u8(v + uniform(rng, -25, 25))};
  };

  const long area = static_cast<long>(width) * height;
  const long discs = area / 2500;
  for (long i = 0; i < discs; ++i) {
    const double cx = uniform(rng, 0, width), cy = uniform(rng, 0, height);
    const double r = uniform(rng, 2.0, 9.0);
    const auto col = colour();
    for (int y = static_cast<int>(cy - r); y <= static_cast<int>(cy + r) + 1; ++y)
      for (int x = static_cast<int>(cx - r); x <= static_cast<int>(cx + r) + 1; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) paint(x, y, col);
  }
  const long segments = area / 6000;
  for (long i = 0; i < segments; ++i) {
    const double x0 = uniform(rng, 0, width), y0 = uniform(rng, 0, height);
    const double len = uniform(rng, 10.0, 50.0), ang = uniform(rng, 0, 2 * std::numbers::pi);
    const int thick = 1 + static_cast<int>(uniform01(rng) * 2.0);
    const auto col = colour();
    for (double t = 0; t <= len; t += 0.5) {
      const int x = static_cast<int>(x0 + t * std::cos(ang)), y = static_cast<int>(y0 + t * std::sin(ang));
      for (int dy = 0; dy < thick; ++dy)
        for (int dx = 0; dx < thick; ++dx) paint(x + dx, y + dy, col);
    }
  }
  return img;
}

Image make_smooth_source(int width, int height, std::uint64_t seed) {
  if (width < 1024 || height < 1024) {
    throw Error(ErrorKind::InvalidArgument, "make_smooth_source: dimensions must be at least 1024x1024");
  }
  std::mt19937_64 rng(mix(seed, 2));
  std::vector<float> base;
  fill_noise(base, width, height, rng, {{256, 1.0f}, {128, 0.5f}});
  Image img(width, height, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double l = 100.0 + 80.0 * base[static_cast<std::size_t>(y) * width + x];
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = saturate_u8(l);
    }
  }
  // Sparse blobs give the detectors something to register on.
  const long blobs = static_cast<long>(width) * height / 4096;
  for (long i = 0; i < blobs; ++i) {
    const double cx = uniform(rng, 0, width), cy = uniform(rng, 0, height);
    const double r = uniform(rng, 3.0, 6.0);
    const double delta = uniform01(rng) < 0.5 ? -60.0 : 60.0;
    for (int y = std::max(0, static_cast<int>(cy - r)); y <= std::min(height - 1, static_cast<int>(cy + r) + 1); ++y)
      for (int x = std::max(0, static_cast<int>(cx - r)); x <= std::min(width - 1, static_cast<int>(cx + r) + 1); ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r)
          for (int c = 0; c < 3; ++c) img.at(x, y, c) = saturate_u8(img.at(x, y, c) + delta);
  }
  return img;
}

// ---------------------------------------------------------------------------
// Sequences

double horizontal_step(const SequenceParams& p) { return (1.0 - p.overlap) * p.frame_width; }
double vertical_step(const SequenceParams& p) { return (1.0 - p.overlap) * p.frame_height; }

namespace {

int grid_columns(const SequenceParams& p) { return std::max(1, std::min(p.columns, p.n_frames)); }
int grid_rows(const SequenceParams& p) {
  const int cols = std::max(1, p.columns);
  return (p.n_frames + cols - 1) / cols;
}

double jitter_margin(const SequenceParams& p) {
  const double th = p.rot_jitter * std::numbers::pi / 180.0;
  const double s = 1.0 + p.scale_jitter;
  const double hw = 0.5 * p.frame_width, hh = 0.5 * p.frame_height;
  const double ex = s * (hw * std::cos(th) + hh * std::sin(th)) - hw;
  const double ey = s * (hw * std::sin(th) + hh * std::cos(th)) - hh;
  return std::max(ex, ey) + (p.projective ? 24.0 : 0.0) + 8.0;
}

}  // namespace

std::pair<int, int> required_source_size(const SequenceParams& p) {
  const double m = jitter_margin(p);
  const double w = p.frame_width + (grid_columns(p) - 1) * horizontal_step(p) + 2 * m;
  const double h = p.frame_height + (grid_rows(p) - 1) * vertical_step(p) + 2 * m;
  return {std::max(1024, static_cast<int>(std::ceil(w))), std::max(1024, static_cast<int>(std::ceil(h)))};
}

Homography frame_pose(const SequenceParams& p, int k, int source_width, int source_height) {
  const int cols = std::max(1, p.columns);
  const int row = k / cols;
  int col = k % cols;
  if (row % 2 == 1) col = grid_columns(p) - 1 - col;

  // Centre the flight pattern inside the source.
  const double span_w = (grid_columns(p) - 1) * horizontal_step(p);
  const double span_h = (grid_rows(p) - 1) * vertical_step(p);
  const double cx = 0.5 * (source_width - 1) - 0.5 * span_w + col * horizontal_step(p);
  const double cy = 0.5 * (source_height - 1) - 0.5 * span_h + row * vertical_step(p);

  std::mt19937_64 rng(mix(p.seed, 100, static_cast<std::uint64_t>(k)));
  const double theta = uniform(rng, -p.rot_jitter, p.rot_jitter) * std::numbers::pi / 180.0;
  const double s = 1.0 + uniform(rng, -p.scale_jitter, p.scale_jitter);
  const double a = p.projective ? uniform(rng, -2e-5, 2e-5) : 0.0;
  const double b = p.projective ? uniform(rng, -2e-5, 2e-5) : 0.0;

  const Homography centre = Homography::translation(-0.5 * (p.frame_width - 1), -0.5 * (p.frame_height - 1));
  const Homography pose = Homography::similarity(s, theta, cx, cy);
  if (!p.projective) return compose(pose, centre);
  const Homography persp({1, 0, 0, 0, 1, 0, a, b, 1});
  return compose(pose, compose(persp, centre));
}

GroundTruthSequence generate_sequence(const Image& source, const SequenceParams& params) {
  if (params.n_frames < 1 || params.frame_width < 16 || params.frame_height < 16 ||
      !(params.overlap >= 0.0 && params.overlap < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "generate_sequence: invalid parameters");
  }
  GroundTruthSequence seq;
  seq.params = params;
  seq.source_width = source.width;
  seq.source_height = source.height;
  const int fw = params.frame_width, fh = params.frame_height;
  const int ch = source.channels;

  for (int k = 0; k < params.n_frames; ++k) {
    const Homography gt = frame_pose(params, k, source.width, source.height);
    for (const auto& c : {Point2{0, 0}, Point2{fw - 1.0, 0}, Point2{0, fh - 1.0}, Point2{fw - 1.0, fh - 1.0}}) {
      const Point2 q = apply_homography(gt, c);
      if (q.x < 0 || q.y < 0 || q.x > source.width - 1 || q.y > source.height - 1) {
        throw Error(ErrorKind::PoseEscapesSource,
                    "generate_sequence: frame " + std::to_string(k) + " leaves the source");
      }
    }
    Image frame(fw, fh, ch);
    std::mt19937_64 photo(mix(params.seed, 200, static_cast<std::uint64_t>(k)));
    const double offset = params.photometric_jitter > 0
                              ? uniform(photo, -params.photometric_jitter, params.photometric_jitter)
                              : 0.0;
    for (int y = 0; y < fh; ++y) {
      for (int x = 0; x < fw; ++x) {
        const Point2 q = sample_point(gt, x, y);
        for (int c = 0; c < ch; ++c) {
          double v = bilinear(source, q.x, q.y, c) + offset;
          if (params.noise_sigma > 0) v += params.noise_sigma * gaussian(photo);
          frame.at(x, y, c) = saturate_u8(v);
        }
      }
    }
    seq.frames.push_back(std::move(frame));
    seq.gt.push_back(gt);
  }
  return seq;
}

Homography gt_frame_to_mosaic(const GroundTruthSequence& seq, int k) {
  return compose(invert(seq.gt[0]), seq.gt[static_cast<std::size_t>(k)]);
}

// ---------------------------------------------------------------------------
// Evaluation

EvalReport evaluate(const std::vector<std::optional<Homography>>& estimated,
                    const std::vector<Homography>& gt, int frame_width, int frame_height) {
  if (estimated.size() != gt.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "evaluate: " + std::to_string(estimated.size()) +
                                                " estimates for " + std::to_string(gt.size()) +
                                                " ground-truth frames");
  }
  EvalReport r;
  r.corner_error.resize(gt.size());
  double sum = 0;
  const Homography first_inv = invert(gt.front());
  for (std::size_t k = 0; k < gt.size(); ++k) {
    if (!estimated[k]) {
      ++r.rejected;
      continue;
    }
    ++r.stitched;
    const Homography ref = compose(first_inv, gt[k]);
    const double e = corner_transfer_error(*estimated[k], ref, frame_width, frame_height);
    r.corner_error[k] = e;
    sum += e;
    r.max_error = std::max(r.max_error, e);
    r.drift = e;
  }
  r.mean_error = r.stitched ? sum / r.stitched : 0.0;
  return r;
}

EvalReport evaluate(const std::vector<std::optional<Homography>>& estimated,
                    const GroundTruthSequence& seq) {
  return evaluate(estimated, seq.gt, seq.params.frame_width, seq.params.frame_height);
}

EvalReport evaluate(const MosaicState& state, const GroundTruthSequence& seq) {
  std::vector<std::optional<Homography>> est(seq.gt.size());
  double total = 0;
  for (const auto& r : state.reports) {
    total += r.timings.total;
    if (r.frame_index >= 0 && static_cast<std::size_t>(r.frame_index) < est.size()) {
      est[static_cast<std::size_t>(r.frame_index)] = r.homography;
    } else {
      throw Error(ErrorKind::IndexOutOfRange, "evaluate: report index outside the sequence");
    }
  }
  if (state.reports.size() != seq.gt.size()) {
    throw Error(ErrorKind::IndexOutOfRange, "evaluate: report count differs from sequence length");
  }
  EvalReport r = evaluate(est, seq);
  r.total_time = total;
  r.mean_frame_time = state.reports.empty() ? 0 : total / state.reports.size();
  return r;
}

double seam_metric(const Image& canvas, const Mask& seam) {
  if (seam.count() == 0) throw Error(ErrorKind::InvalidArgument, "seam_metric: empty seam mask");
  if (seam.width != canvas.width || seam.height != canvas.height) {
    throw Error(ErrorKind::ShapeMismatch, "seam_metric: mask and canvas sizes differ");
  }
  const auto mag = sobel_magnitude(canvas);
  double sum = 0;
  for (std::size_t i = 0; i < mag.size(); ++i)
    if (seam.data[i]) sum += mag[i];
  return sum / static_cast<double>(seam.count());
}

Mask seam_mask(const Mask& before, const Mask& frame) {
  if (before.width != frame.width || before.height != frame.height) {
    throw Error(ErrorKind::ShapeMismatch, "seam_mask: mask sizes differ");
  }
  const int w = frame.width, h = frame.height;
  Mask out(w, h);
  constexpr int kN[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!frame.at(x, y) || !before.at(x, y)) continue;
      for (const auto& n : kN) {
        const int nx = x + n[0], ny = y + n[1];
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        if (!frame.at(nx, ny) && before.at(nx, ny)) {
          out.at(x, y) = 1;
          out.at(nx, ny) = 1;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Files

void write_gt(std::ostream& out, const GroundTruthSequence& seq) {
  out << "# frame " << seq.params.frame_width << 'x' << seq.params.frame_height << " source "
      << seq.source_width << 'x' << seq.source_height << '\n';
  for (std::size_t k = 0; k < seq.gt.size(); ++k) out << k << '\n' << to_text(seq.gt[k]) << '\n';
}

namespace {

// Records of `k` followed by a 9-number line; '#' lines are comments.
template <typename OnRecord>
void read_records(std::istream& in, OnRecord on_record, GtFile* header) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (header) {
        int fw = 0, fh = 0;
        if (std::sscanf(line.c_str(), "# frame %dx%d", &fw, &fh) == 2) {
          header->frame_width = fw;
          header->frame_height = fh;
        }
      }
      continue;
    }
    std::istringstream idx(line);
    long k;
    std::string rest;
    if (!(idx >> k) || (idx >> rest) || k < 0) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected a frame index");
    }
    std::string numbers;
    if (!std::getline(in, numbers)) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no + 1) + ": missing homography");
    }
    ++line_no;
    try {
      on_record(static_cast<std::size_t>(k), homography_from_text(numbers));
    } catch (const Error& e) {
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

GtFile read_gt(std::istream& in) {
  GtFile file;
  read_records(
      in,
      [&](std::size_t k, const Homography& h) {
        if (k != file.gt.size()) throw Error(ErrorKind::ParseError, "gt frames must be consecutive from 0");
        file.gt.push_back(h);
      },
      &file);
  return file;
}

std::vector<std::optional<Homography>> read_transforms(std::istream& in) {
  std::vector<std::optional<Homography>> out;
  read_records(
      in,
      [&](std::size_t k, const Homography& h) {
        if (out.size() <= k) out.resize(k + 1);
        out[k] = h;
      },
      nullptr);
  return out;
}

std::string eval_csv(const EvalReport& r) {
  std::string out = "metric,value\n";
  char buf[128];
  auto row = [&](const char* name, double v) {
    std::snprintf(buf, sizeof(buf), "%s,%.6f\n", name, v);
    out += buf;
  };
  out += "stitched," + std::to_string(r.stitched) + "\n";
  out += "rejected," + std::to_string(r.rejected) + "\n";
  row("mean_corner_error_px", r.mean_error);
  row("max_corner_error_px", r.max_error);
  row("drift_px", r.drift);
  row("total_time_s", r.total_time);
  row("mean_frame_time_s", r.mean_frame_time);
  for (std::size_t k = 0; k < r.corner_error.size(); ++k) {
    if (r.corner_error[k]) {
      std::snprintf(buf, sizeof(buf), "frame_%zu_corner_error_px,%.6f\n", k, *r.corner_error[k]);
    } else {
      std::snprintf(buf, sizeof(buf), "frame_%zu_corner_error_px,\n", k);
    }
    out += buf;
  }
  return out;
}

void write_sequence(const std::string& dir, const GroundTruthSequence& seq) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.ppm", k);
    write_file((std::filesystem::path(dir) / name).string(), encode_pnm(seq.frames[k]));
  }
  std::ostringstream gt;
  write_gt(gt, seq);
  write_text_file((std::filesystem::path(dir) / "gt.txt").string(), gt.str());
}

}  // namespace mosaic
