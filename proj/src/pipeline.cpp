#include "mosaic/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>

#include "mosaic/error.hpp"

namespace mosaic {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

FeatureSet detect(const Image& img, const PipelineConfig& cfg) {
  return cfg.detector == DetectorKind::Sift ? detect_sift(img, cfg.sift) : detect_orb(img, cfg.orb);
}

std::array<Point2, 4> corners_of(int w, int h) {
  return {Point2{0, 0}, Point2{w - 1.0, 0}, Point2{w - 1.0, h - 1.0}, Point2{0, h - 1.0}};
}

// Raised by the stitch stages; becomes a rejected report.
struct Rejection {
  std::string reason;
};

}  // namespace

void PipelineConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); };
  if (!(scale > 0.0 && scale <= 1.0)) bad("scale must lie in (0, 1]");
  if (!(ratio > 0.0 && ratio < 1.0)) bad("ratio must lie in (0, 1)");
  if (!(ransac.threshold > 0.0)) bad("ransac threshold must be > 0");
  if (ransac.max_iterations < 1) bad("ransac iterations must be >= 1");
  if (!(ransac.confidence > 0.0 && ransac.confidence < 1.0)) bad("ransac confidence must lie in (0, 1)");
  if (ransac.min_inliers < 4) bad("min inliers must be >= 4");
  if (!(roi_factor >= 1.0)) bad("roi factor must be >= 1");
  if (!(feather_radius > 0.0)) bad("feather radius must be > 0");
  if (!(edge_boost >= 0.0 && edge_boost <= 1.0)) bad("edge boost must lie in [0, 1]");
  if (snapshot_every < 0) bad("snapshot cadence must be >= 0");
  if (canvas_limit < 64) bad("canvas limit must be >= 64");
}

std::optional<std::string> sanity_gates(const GateInput& in, int min_inliers,
                                        const Homography& reference) {
  if (in.inliers < min_inliers) return "min-inliers";
  std::array<Point2, 4> q, ref;
  const auto c = corners_of(in.width, in.height);
  try {
    for (std::size_t i = 0; i < 4; ++i) {
      q[i] = apply_homography(in.h, c[i]);
      ref[i] = apply_homography(reference, c[i]);
    }
  } catch (const Error&) {
    return "degenerate-projection";
  }
  // Same turning direction as the source rectangle at every corner.
  double area2 = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const Point2& a = q[i];
    const Point2& b = q[(i + 1) % 4];
    const Point2& d = q[(i + 2) % 4];
    const double cross = (b.x - a.x) * (d.y - b.y) - (b.y - a.y) * (d.x - b.x);
    if (!(cross > 0.0)) return "non-convex";
    area2 += a.x * b.y - b.x * a.y;
  }
  const double area_ratio = 0.5 * area2 / (double(in.width - 1) * double(in.height - 1));
  if (!(area_ratio >= 0.25 && area_ratio <= 4.0)) return "area-ratio";
  const double diag = std::hypot(double(in.width), double(in.height));
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::hypot(q[i].x - ref[i].x, q[i].y - ref[i].y) > 1.5 * diag) return "corner-displacement";
  }
  return std::nullopt;
}

MosaicState init(const Image& first_frame, const PipelineConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  Image f;
  try {
    f = cfg.scale < 1.0 ? downscale(first_frame, cfg.scale) : first_frame;
  } catch (const Error& e) {
    throw Error(ErrorKind::FrameTooSmall, std::string("init: ") + e.what());
  }
  if (f.width < 64 || f.height < 64) {
    throw Error(ErrorKind::FrameTooSmall, "init: first frame must be at least 64x64 after scaling");
  }
  MosaicState s;
  s.config = cfg;
  s.canvas = make_canvas(f);
  s.frames_stitched = 1;
  s.frames_seen = 1;
  s.last_width = f.width;
  s.last_height = f.height;
  FrameReport r;
  r.frame_index = 0;
  r.homography = Homography::identity();
  r.status = FrameStatus::Stitched;
  r.timings.total = seconds_since(t0);
  s.reports.push_back(r);
  return s;
}

FrameReport stitch_next(MosaicState& state, const Image& frame) {
  const PipelineConfig& cfg = state.config;
  const auto t_start = Clock::now();
  FrameReport r;
  r.frame_index = state.frames_seen++;

  try {
    Image f;
    try {
      f = cfg.scale < 1.0 ? downscale(frame, cfg.scale) : frame;
    } catch (const Error&) {
      throw Rejection{"frame-too-small"};
    }
    if (f.width < 64 || f.height < 64) throw Rejection{"frame-too-small"};

    // Features on the frame and on the ROI of the mosaic.
    auto t = Clock::now();
    const RoiImage roi = cfg.use_roi ? roi_extract(state.canvas, cfg.roi_factor)
                                     : full_canvas_roi(state.canvas);
    if (roi.image.width < 64 || roi.image.height < 64) throw Rejection{"roi-too-small"};
    const FeatureSet frame_fs = detect(f, cfg);
    const FeatureSet roi_fs = detect(roi.image, cfg);
    r.timings.feature_extraction = seconds_since(t);
    r.keypoints_frame = static_cast<int>(frame_fs.size());
    r.keypoints_roi = static_cast<int>(roi_fs.size());
    if (frame_fs.empty() || roi_fs.empty()) throw Rejection{"no-features"};

    t = Clock::now();
    const MatchSet raw = brute_force_match(frame_fs, roi_fs, cfg.cross_check);
    const MatchSet kept = ratio_test(raw, cfg.ratio);
    r.timings.matching = seconds_since(t);
    r.matches_raw = static_cast<int>(raw.matches.size());
    r.matches_ratio = static_cast<int>(kept.matches.size());

    // RANSAC in ROI-local coordinates, then shift into mosaic coordinates.
    t = Clock::now();
    const auto corrs = to_correspondences(kept, frame_fs.keypoints, roi_fs.keypoints);
    // Too few matches to ever reach a min_inliers consensus.
    if (corrs.size() < static_cast<std::size_t>(cfg.ransac.min_inliers)) {
      throw Rejection{std::string(to_string(ErrorKind::NoConsensus))};
    }
    RansacParams rp = cfg.ransac;
    rp.seed = cfg.seed + static_cast<std::uint64_t>(r.frame_index);
    RansacResult fit;
    try {
      fit = ransac_homography(corrs, rp);
    } catch (const Error& e) {
      throw Rejection{std::string(to_string(e.kind()))};
    }
    r.inliers = fit.inlier_count();
    const Homography roi_to_mosaic = Homography::translation(roi.offset.x - state.canvas.origin.x,
                                                             roi.offset.y - state.canvas.origin.y);
    const Homography h = compose(roi_to_mosaic, fit.model);
    r.timings.ransac = seconds_since(t);

    if (auto why = sanity_gates({h, f.width, f.height, r.inliers}, cfg.ransac.min_inliers,
                                state.last_transform)) {
      throw Rejection{*why};
    }

    // Warp in canvas coordinates; origin shifts are integral so growing the
    // canvas afterwards only translates the result.
    t = Clock::now();
    const Homography to_canvas =
        compose(Homography::translation(state.canvas.origin.x, state.canvas.origin.y), h);
    WarpResult warp = warp_frame(f, to_canvas);
    const Shift shift = expand_canvas(state.canvas, warp.bbox, cfg.canvas_limit);
    warp.bbox = warp.bbox.translated(shift.dx, shift.dy);
    r.timings.warping = seconds_since(t);

    t = Clock::now();
    if (cfg.blend) {
      const WeightMap weights = distance_weight(warp.mask, cfg.feather_radius);
      if (cfg.edge_boost > 0.0) {
        const Mask edges = edge_complexity_mask(warp.warped, &warp.mask);
        alpha_blend(state.canvas, warp, weights, &edges, cfg.edge_boost);
      } else {
        alpha_blend(state.canvas, warp, weights, nullptr, 0.0);
      }
    } else {
      WeightMap ones{warp.mask.width, warp.mask.height,
                     std::vector<float>(warp.mask.data.size(), 1.0f)};
      alpha_blend(state.canvas, warp, ones, nullptr, 0.0);
    }
    r.timings.blending = seconds_since(t);

    state.canvas.last_frame_bbox = warp.bbox;
    state.canvas.frames += 1;
    state.last_transform = h;
    state.last_width = f.width;
    state.last_height = f.height;
    state.frames_stitched += 1;
    r.homography = h;
    r.status = FrameStatus::Stitched;
  } catch (const Rejection& rej) {
    r.status = FrameStatus::Rejected;
    r.reason = rej.reason;
    r.homography.reset();
  } catch (const Error& e) {
    r.status = FrameStatus::Rejected;
    r.reason = std::string(to_string(e.kind()));
    r.homography.reset();
  }
  r.timings.total = seconds_since(t_start);
  state.reports.push_back(r);
  return r;
}

MosaicState run_sequence(const FrameSource& frames, const PipelineConfig& cfg,
                         const SnapshotSink& snapshot) {
  std::optional<Image> first = frames();
  if (!first) throw Error(ErrorKind::EmptyInput, "run_sequence: no frames");
  MosaicState state = init(*first, cfg);
  auto maybe_snapshot = [&](int index) {
    if (snapshot && cfg.snapshot_every > 0 && (index + 1) % cfg.snapshot_every == 0) {
      snapshot(state, index);
    }
  };
  maybe_snapshot(0);
  while (std::optional<Image> next = frames()) {
    const FrameReport r = stitch_next(state, *next);
    maybe_snapshot(r.frame_index);
  }
  return state;
}

MosaicState run_sequence(const std::vector<Image>& frames, const PipelineConfig& cfg,
                         const SnapshotSink& snapshot) {
  std::size_t i = 0;
  return run_sequence(
      [&]() -> std::optional<Image> {
        if (i >= frames.size()) return std::nullopt;
        return frames[i++];
      },
      cfg, snapshot);
}

Image render_mosaic(const MosaicState& state) {
  const MosaicCanvas& c = state.canvas;
  int x0 = c.image.width, y0 = c.image.height, x1 = 0, y1 = 0;
  for (int y = 0; y < c.image.height; ++y) {
    for (int x = 0; x < c.image.width; ++x) {
      if (!c.valid.at(x, y)) continue;
      x0 = std::min(x0, x);
      y0 = std::min(y0, y);
      x1 = std::max(x1, x + 1);
      y1 = std::max(y1, y + 1);
    }
  }
  if (x1 <= x0 || y1 <= y0) return Image();
  Image out(x1 - x0, y1 - y0, 3);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      if (!c.valid.at(x, y)) continue;
      for (int ch = 0; ch < 3; ++ch) out.at(x - x0, y - y0, ch) = c.image.at(x, y, ch);
    }
  }
  return out;
}

std::string status_string(const FrameReport& r) {
  return r.status == FrameStatus::Stitched ? "stitched" : "rejected(" + r.reason + ")";
}

std::string timing_csv(const std::vector<FrameReport>& reports) {
  std::string out =
      "frame,status,keypoints_frame,keypoints_roi,matches_raw,matches_ratio,inliers,"
      "t_features,t_matching,t_ransac,t_warp,t_blend,t_total\n";
  char buf[512];
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof(buf), "%d,%s,%d,%d,%d,%d,%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.frame_index, status_string(r).c_str(), r.keypoints_frame, r.keypoints_roi,
                  r.matches_raw, r.matches_ratio, r.inliers, r.timings.feature_extraction,
                  r.timings.matching, r.timings.ransac, r.timings.warping, r.timings.blending,
                  r.timings.total);
    out += buf;
  }
  return out;
}

std::string transforms_text(const std::vector<FrameReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    if (r.status != FrameStatus::Stitched || !r.homography) continue;
    out += std::to_string(r.frame_index) + "\n" + to_text(*r.homography) + "\n";
  }
  return out;
}

}  // namespace mosaic
