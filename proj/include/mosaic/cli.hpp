#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mosaic/image.hpp"
#include "mosaic/pipeline.hpp"

namespace mosaic {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

struct BenchRow {
  DetectorKind detector = DetectorKind::Sift;
  double scale = 1.0;
  int keypoints_frame = 0;
  int keypoints_roi = 0;
  int inliers = 0;
  bool stitched = false;
  StageTimings timings;  // per-stage medians over the repeats
};

/// First-stitch timings for each detector x scale: init on `first`, then one
/// stitch_next of `second`. Each timing column is the median over `repeats`.
std::vector<BenchRow> bench_first_stitch(const Image& first, const Image& second,
                                         const std::vector<double>& scales,
                                         const std::vector<DetectorKind>& detectors,
                                         const PipelineConfig& base, int repeats = 3);
std::string bench_csv(const std::vector<BenchRow>& rows);

/// Image files (.pgm/.ppm/.pnm/.png) of a directory, or the matches of a
/// `*`/`?` filename pattern, in lexicographic order.
std::vector<std::string> list_frames(const std::string& dir_or_glob);

int run_cli(int argc, char** argv);
/// Same as run_cli with explicit arguments (without the program name) and streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mosaic
