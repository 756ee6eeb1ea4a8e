#pragma once

#include <optional>
#include <vector>

#include "mosaic/features.hpp"
#include "mosaic/geometry.hpp"

namespace mosaic {

struct Match {
  int query_idx = 0;  // index into the frame's FeatureSet
  int train_idx = 0;  // index into the mosaic ROI's FeatureSet
  double distance = 0.0;
  /// Absent when the train set holds a single descriptor.
  std::optional<double> second_distance;
};

enum class MatchMetric { L2, Hamming };

struct MatchSet {
  std::vector<Match> matches;  // ordered by query_idx, at most one per query
  MatchMetric metric = MatchMetric::L2;
  std::optional<double> ratio_used;
};

/// Exhaustive nearest / second-nearest scan. Ties go to the lower train index.
/// With cross_check, a match survives only if the query is also the train
/// descriptor's nearest neighbour.
MatchSet brute_force_match(const FeatureSet& query, const FeatureSet& train,
                           bool cross_check = false);

/// Keeps matches with distance < ratio * second_distance.
MatchSet ratio_test(const MatchSet& ms, double ratio);

std::vector<Correspondence> to_correspondences(const MatchSet& ms,
                                               const std::vector<Keypoint>& query_kps,
                                               const std::vector<Keypoint>& train_kps,
                                               Point2 roi_offset = {});

int hamming_distance(const BinaryDescriptor& a, const BinaryDescriptor& b);

}  // namespace mosaic
