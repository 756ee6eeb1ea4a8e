#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mosaic/compositor.hpp"
#include "mosaic/features.hpp"
#include "mosaic/geometry.hpp"
#include "mosaic/matching.hpp"

namespace mosaic {

enum class DetectorKind { Sift, Orb };

struct PipelineConfig {
  DetectorKind detector = DetectorKind::Sift;
  double scale = 1.0;  // frame downscale factor in (0, 1]
  double ratio = 0.75;
  RansacParams ransac{};
  bool cross_check = false;
  double roi_factor = 3.0;
  bool use_roi = true;  // false matches against the whole canvas
  double feather_radius = 64.0;
  double edge_boost = 0.35;
  bool blend = true;  // false gives the hard-cut composite
  std::uint64_t seed = 0;
  int snapshot_every = 0;
  int canvas_limit = 20000;
  SiftParams sift{};
  OrbParams orb{};

  /// Throws InvalidArgument naming the first field out of range.
  void validate() const;
};

struct StageTimings {
  double feature_extraction = 0;
  double matching = 0;
  double ransac = 0;
  double warping = 0;
  double blending = 0;
  double total = 0;
};

enum class FrameStatus { Stitched, Rejected };

struct FrameReport {
  int frame_index = 0;
  int keypoints_frame = 0;
  int keypoints_roi = 0;
  int matches_raw = 0;
  int matches_ratio = 0;
  int inliers = 0;
  std::optional<Homography> homography;  // frame -> mosaic, set when stitched
  FrameStatus status = FrameStatus::Stitched;
  std::string reason;  // rejection reason
  StageTimings timings;
};

struct MosaicState {
  MosaicCanvas canvas;
  int frames_stitched = 0;
  int frames_seen = 0;
  Homography last_transform;  // frame -> mosaic of the last stitched frame
  int last_width = 0;
  int last_height = 0;
  PipelineConfig config;
  std::vector<FrameReport> reports;
};

struct GateInput {
  Homography h;  // frame -> mosaic
  int width = 0;
  int height = 0;
  int inliers = 0;
};

/// Empty on accept, otherwise the rejection reason. Corner displacement is
/// measured against `reference` (the previous frame's transform).
std::optional<std::string> sanity_gates(const GateInput& in, int min_inliers,
                                        const Homography& reference = {});

MosaicState init(const Image& first_frame, const PipelineConfig& cfg);

/// Never throws on data problems: failures are reported as rejected frames
/// and leave the canvas and transforms untouched.
FrameReport stitch_next(MosaicState& state, const Image& frame);

using FrameSource = std::function<std::optional<Image>()>;
using SnapshotSink = std::function<void(const MosaicState&, int frame_index)>;

/// Throws EmptyInput when the source yields nothing.
MosaicState run_sequence(const FrameSource& frames, const PipelineConfig& cfg,
                         const SnapshotSink& snapshot = {});
MosaicState run_sequence(const std::vector<Image>& frames, const PipelineConfig& cfg,
                         const SnapshotSink& snapshot = {});

/// The mosaic with never-written pixels left black, cropped to written pixels.
Image render_mosaic(const MosaicState& state);

std::string status_string(const FrameReport& r);
/// Header plus one row per report, in the timing CSV layout.
std::string timing_csv(const std::vector<FrameReport>& reports);
/// `k` line followed by 9 numbers per stitched frame.
std::string transforms_text(const std::vector<FrameReport>& reports);

}  // namespace mosaic
