#include "mosaic/matching.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "mosaic/error.hpp"

namespace mosaic {

namespace {

// Eight independent partial sums so the loop vectorizes without reassociation.
float squared_l2(const float* a, const float* b) {
  float acc[8] = {};
  for (int i = 0; i < 128; i += 8) {
    for (int k = 0; k < 8; ++k) {
      const float d = a[i + k] - b[i + k];
      acc[k] += d * d;
    }
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
}

struct Nearest {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  double second_d = std::numeric_limits<double>::infinity();

  void offer(int idx, double d) {
    if (d < best_d) {
      second_d = best_d;
      best_d = d;
      best = idx;
    } else if (d < second_d) {
      second_d = d;
    }
  }
};

template <typename Dist>
std::vector<Nearest> scan(std::size_t nq, std::size_t nt, Dist dist) {
  std::vector<Nearest> out(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    Nearest n;
    for (std::size_t t = 0; t < nt; ++t) n.offer(static_cast<int>(t), dist(q, t));
    out[q] = n;
  }
  return out;
}

}  // namespace

int hamming_distance(const BinaryDescriptor& a, const BinaryDescriptor& b) {
  return std::popcount(a[0] ^ b[0]) + std::popcount(a[1] ^ b[1]) + std::popcount(a[2] ^ b[2]) +
         std::popcount(a[3] ^ b[3]);
}

MatchSet brute_force_match(const FeatureSet& query, const FeatureSet& train, bool cross_check) {
  if (query.kind != train.kind) {
    throw Error(ErrorKind::DescriptorKindMismatch, "brute_force_match: descriptor kinds differ");
  }
  if (train.empty()) throw Error(ErrorKind::EmptyTrain, "brute_force_match: empty train set");

  MatchSet ms;
  const std::size_t nq = query.size(), nt = train.size();
  std::vector<Nearest> forward;
  std::vector<Nearest> backward;
  if (query.kind == DescriptorKind::Float128) {
    ms.metric = MatchMetric::L2;
    const float* qd = query.float_descriptors.data();
    const float* td = train.float_descriptors.data();
    auto dist = [&](const float* a, const float* b) { return std::sqrt(double(squared_l2(a, b))); };
    forward = scan(nq, nt, [&](std::size_t q, std::size_t t) { return dist(qd + q * 128, td + t * 128); });
    if (cross_check) {
      backward = scan(nt, nq, [&](std::size_t t, std::size_t q) { return dist(qd + q * 128, td + t * 128); });
    }
  } else {
    ms.metric = MatchMetric::Hamming;
    const auto& qd = query.binary_descriptors;
    const auto& td = train.binary_descriptors;
    forward = scan(nq, nt, [&](std::size_t q, std::size_t t) { return double(hamming_distance(qd[q], td[t])); });
    if (cross_check) {
      backward = scan(nt, nq, [&](std::size_t t, std::size_t q) { return double(hamming_distance(qd[q], td[t])); });
    }
  }

  ms.matches.reserve(nq);
  for (std::size_t q = 0; q < nq; ++q) {
    const Nearest& n = forward[q];
    if (cross_check && backward[static_cast<std::size_t>(n.best)].best != static_cast<int>(q)) continue;
    Match m{static_cast<int>(q), n.best, n.best_d, std::nullopt};
    if (std::isfinite(n.second_d)) m.second_distance = n.second_d;
    ms.matches.push_back(m);
  }
  return ms;
}

MatchSet ratio_test(const MatchSet& ms, double ratio) {
  MatchSet out;
  out.metric = ms.metric;
  out.ratio_used = ratio;
  for (const auto& m : ms.matches) {
    if (m.second_distance && m.distance < ratio * *m.second_distance) out.matches.push_back(m);
  }
  return out;
}

std::vector<Correspondence> to_correspondences(const MatchSet& ms,
                                               const std::vector<Keypoint>& query_kps,
                                               const std::vector<Keypoint>& train_kps,
                                               Point2 roi_offset) {
  std::vector<Correspondence> out;
  out.reserve(ms.matches.size());
  for (const auto& m : ms.matches) {
    if (m.query_idx < 0 || static_cast<std::size_t>(m.query_idx) >= query_kps.size() ||
        m.train_idx < 0 || static_cast<std::size_t>(m.train_idx) >= train_kps.size()) {
      throw Error(ErrorKind::IndexOutOfRange,
                  "to_correspondences: match index out of range (query " +
                      std::to_string(m.query_idx) + ", train " + std::to_string(m.train_idx) + ")");
    }
    const Keypoint& q = query_kps[static_cast<std::size_t>(m.query_idx)];
    const Keypoint& t = train_kps[static_cast<std::size_t>(m.train_idx)];
    out.push_back({{q.x, q.y}, {t.x + roi_offset.x, t.y + roi_offset.y}});
  }
  return out;
}

}  // namespace mosaic
