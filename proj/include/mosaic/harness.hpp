#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mosaic/compositor.hpp"
#include "mosaic/geometry.hpp"
#include "mosaic/image.hpp"
#include "mosaic/pipeline.hpp"

namespace mosaic {

/// Procedural RGB texture: multi-octave value noise plus scattered
/// high-contrast discs and line segments. Requires at least 1024x1024.
Image make_source(int width, int height, std::uint64_t seed);

/// Low-contrast, low-frequency variant used for seam measurements, with
/// sparse small blobs so that frame pairs still register.
Image make_smooth_source(int width, int height, std::uint64_t seed);

struct SequenceParams {
  int n_frames = 20;
  int frame_width = 800;
  int frame_height = 600;
  int columns = 5;          // frames per lawnmower row
  double overlap = 0.7;     // fraction shared by consecutive frames along a row / between rows
  double rot_jitter = 0.0;  // degrees, uniform in +-rot_jitter
  double scale_jitter = 0.0;  // fraction, scale uniform in 1 +- scale_jitter
  double photometric_jitter = 0.0;  // luma levels of brightness offset, uniform +-
  double noise_sigma = 0.0;
  bool projective = false;  // add a small seeded perspective term (stress tests only)
  std::uint64_t seed = 1;
};

struct GroundTruthSequence {
  std::vector<Image> frames;
  std::vector<Homography> gt;  // frame -> source plane
  int source_width = 0;
  int source_height = 0;
  SequenceParams params;
};

/// Horizontal and vertical lawnmower steps in source pixels.
double horizontal_step(const SequenceParams& p);
double vertical_step(const SequenceParams& p);

/// Smallest source (with a jitter margin, at least 1024 square) that holds the flight.
std::pair<int, int> required_source_size(const SequenceParams& p);

/// Ground-truth pose of frame k (frame -> source), before rendering.
Homography frame_pose(const SequenceParams& p, int k, int source_width, int source_height);

/// Renders frames by inverse-mapped bilinear sampling. Brightness jitter and
/// Gaussian noise are applied after rendering, so gt is unaffected.
/// Throws PoseEscapesSource if a frame would sample outside the source.
GroundTruthSequence generate_sequence(const Image& source, const SequenceParams& params);

/// Frame -> mosaic ground truth, where frame 0 defines mosaic coordinates.
Homography gt_frame_to_mosaic(const GroundTruthSequence& seq, int k);

struct EvalReport {
  std::vector<std::optional<double>> corner_error;  // per frame, empty if not stitched
  double max_error = 0;
  double mean_error = 0;
  double drift = 0;  // error of the last stitched frame
  int stitched = 0;
  int rejected = 0;
  double total_time = 0;
  double mean_frame_time = 0;
};

EvalReport evaluate(const std::vector<std::optional<Homography>>& estimated,
                    const GroundTruthSequence& seq);
EvalReport evaluate(const MosaicState& state, const GroundTruthSequence& seq);
/// Variant for files on disk: only ground truth and frame size are needed.
EvalReport evaluate(const std::vector<std::optional<Homography>>& estimated,
                    const std::vector<Homography>& gt, int frame_width, int frame_height);

/// Mean Sobel magnitude (unnormalized kernel) of the luma over the seam pixels.
double seam_metric(const Image& canvas, const Mask& seam);

/// Pixels of `frame_mask` that border non-frame pixels inside `canvas_valid`,
/// i.e. where a hard cut puts a seam. Masks share the canvas layout.
Mask seam_mask(const Mask& canvas_valid_before, const Mask& frame_mask);

// --- files ------------------------------------------------------------------

struct GtFile {
  std::vector<Homography> gt;
  int frame_width = 0;  // from the optional `# frame WxH` header line
  int frame_height = 0;
};

/// Optional `# frame WxH` comment, then per frame a line `k` and a line of 9 numbers.
void write_gt(std::ostream& out, const GroundTruthSequence& seq);
GtFile read_gt(std::istream& in);

/// Reads `k` + 9-number records; frames without a record are empty.
std::vector<std::optional<Homography>> read_transforms(std::istream& in);

std::string eval_csv(const EvalReport& r);

/// Writes frame_0000.ppm ... and gt.txt into `dir`.
void write_sequence(const std::string& dir, const GroundTruthSequence& seq);

}  // namespace mosaic
