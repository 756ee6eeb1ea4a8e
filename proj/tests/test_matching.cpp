#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include "mosaic/error.hpp"
#include "mosaic/matching.hpp"
#include "test_util.hpp"

using namespace mosaic;

namespace {

FeatureSet random_float_set(std::mt19937_64& rng, int n) {
  FeatureSet fs;
  fs.kind = DescriptorKind::Float128;
  for (int i = 0; i < n; ++i) {
    fs.keypoints.push_back({float(i), float(2 * i), 1, 0, 1, 0});
    double norm = 0;
    std::vector<float> d(128);
    for (auto& v : d) {
      v = static_cast<float>(mosaic::testing::uniform(rng, 0, 1));
      norm += double(v) * v;
    }
    for (auto& v : d) fs.float_descriptors.push_back(static_cast<float>(v / std::sqrt(norm)));
  }
  return fs;
}

FeatureSet random_binary_set(std::mt19937_64& rng, int n) {
  FeatureSet fs;
  fs.kind = DescriptorKind::Binary256;
  for (int i = 0; i < n; ++i) {
    fs.keypoints.push_back({float(i), float(i), 1, 0, 1, 0});
    fs.binary_descriptors.push_back({rng(), rng(), rng(), rng()});
  }
  return fs;
}

// Independent quadratic re-scan: full distance table, then sort.
struct Oracle {
  double best;
  double second;
  int best_idx;
};

Oracle oracle_scan(const FeatureSet& q, std::size_t i, const FeatureSet& t) {
  std::vector<std::pair<double, int>> all;
  for (std::size_t j = 0; j < t.size(); ++j) {
    double d;
    if (q.kind == DescriptorKind::Binary256) {
      int bits = 0;
      for (int w = 0; w < 4; ++w) bits += std::popcount(q.binary_descriptors[i][w] ^ t.binary_descriptors[j][w]);
      d = bits;
    } else {
      double s = 0;
      for (int k = 0; k < 128; ++k) {
        const double e = double(q.float_descriptors[i * 128 + k]) - t.float_descriptors[j * 128 + k];
        s += e * e;
      }
      d = std::sqrt(s);
    }
    all.push_back({d, static_cast<int>(j)});
  }
  std::sort(all.begin(), all.end());
  return {all[0].first, all.size() > 1 ? all[1].first : INFINITY, all[0].second};
}

FeatureSet permuted(const FeatureSet& fs, const std::vector<int>& perm) {
  FeatureSet out;
  out.kind = fs.kind;
  for (int p : perm) {
    out.keypoints.push_back(fs.keypoints[p]);
    if (fs.kind == DescriptorKind::Binary256) {
      out.binary_descriptors.push_back(fs.binary_descriptors[p]);
    } else {
      auto d = fs.float_descriptor(p);
      out.float_descriptors.insert(out.float_descriptors.end(), d.begin(), d.end());
    }
  }
  return out;
}

Match make_match(int q, double d, std::optional<double> second) {
  Match m;
  m.query_idx = q;
  m.distance = d;
  m.second_distance = second;
  return m;
}

}  // namespace

TEST_CASE("self-match is the identity with zero distance") {
  std::mt19937_64 rng(1);
  for (const FeatureSet& fs : {random_float_set(rng, 60), random_binary_set(rng, 60)}) {
    const MatchSet ms = brute_force_match(fs, fs);
    REQUIRE(ms.matches.size() == fs.size());
    for (std::size_t i = 0; i < fs.size(); ++i) {
      CHECK(ms.matches[i].query_idx == static_cast<int>(i));
      CHECK(ms.matches[i].train_idx == static_cast<int>(i));
      CHECK(ms.matches[i].distance == 0.0);
    }
    CHECK(ms.metric == (fs.kind == DescriptorKind::Binary256 ? MatchMetric::Hamming : MatchMetric::L2));
  }
}

TEST_CASE("single-descriptor train has no second distance") {
  std::mt19937_64 rng(2);
  const FeatureSet q = random_float_set(rng, 5), t = random_float_set(rng, 1);
  const MatchSet ms = brute_force_match(q, t);
  REQUIRE(ms.matches.size() == 5);
  for (const auto& m : ms.matches) {
    CHECK(m.train_idx == 0);
    CHECK(!m.second_distance.has_value());
  }
  CHECK(ratio_test(ms, 0.999).matches.empty());
}

TEST_CASE("hand-built Hamming distances 0, 5, 9") {
  FeatureSet q, t;
  q.kind = t.kind = DescriptorKind::Binary256;
  const BinaryDescriptor base = {0x0123456789ABCDEFull, 0xFEDCBA9876543210ull, 0, ~0ull};
  q.keypoints.push_back({});
  q.binary_descriptors.push_back(base);
  BinaryDescriptor five = base, nine = base;
  five[0] ^= 0x1Full;            // 5 bits
  nine[2] ^= 0x1FFull;           // 9 bits
  for (const auto& d : {nine, base, five}) {
    t.keypoints.push_back({});
    t.binary_descriptors.push_back(d);
  }
  CHECK(hamming_distance(base, five) == 5);
  CHECK(hamming_distance(base, nine) == 9);
  const MatchSet ms = brute_force_match(q, t);
  REQUIRE(ms.matches.size() == 1);
  CHECK(ms.matches[0].distance == 0);
  CHECK(ms.matches[0].train_idx == 1);
  CHECK(*ms.matches[0].second_distance == 5);
}

TEST_CASE("ties go to the lower train index") {
  std::mt19937_64 rng(3);
  FeatureSet t = random_binary_set(rng, 3);
  t.binary_descriptors[2] = t.binary_descriptors[0];
  FeatureSet q;
  q.kind = DescriptorKind::Binary256;
  q.keypoints.push_back({});
  q.binary_descriptors.push_back(t.binary_descriptors[0]);
  const MatchSet ms = brute_force_match(q, t);
  CHECK(ms.matches[0].train_idx == 0);
  CHECK(*ms.matches[0].second_distance == 0);
}

TEST_CASE("brute_force_match errors") {
  std::mt19937_64 rng(4);
  const FeatureSet f = random_float_set(rng, 3), b = random_binary_set(rng, 3);
  try {
    brute_force_match(f, b);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DescriptorKindMismatch);
  }
  FeatureSet empty;
  try {
    brute_force_match(f, empty);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyTrain);
  }
  CHECK(brute_force_match(empty, f).matches.empty());
}

TEST_CASE("ratio_test examples") {
  MatchSet ms;
  ms.matches = {make_match(0, 10, 100), make_match(1, 80, 100), make_match(2, 0, 0), make_match(3, 5, std::nullopt)};
  const MatchSet kept = ratio_test(ms, 0.75);
  REQUIRE(kept.matches.size() == 1);
  CHECK(kept.matches[0].query_idx == 0);
  CHECK(kept.ratio_used == 0.75);

  // Near 1 keeps every match whose second distance is defined and larger.
  CHECK(ratio_test(ms, 0.999999).matches.size() == 2);
  // Near 0 drops every nonzero distance.
  CHECK(ratio_test(ms, 1e-9).matches.empty());
}

TEST_CASE("property: ratio_test filters monotonically") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const FeatureSet q = random_binary_set(rng, 40), t = random_binary_set(rng, 30);
    const MatchSet ms = brute_force_match(q, t);
    std::size_t prev = ms.matches.size();
    for (double r : {0.99, 0.95, 0.9, 0.8, 0.7, 0.5}) {
      const MatchSet f = ratio_test(ms, r);
      CHECK(f.matches.size() <= prev);
      prev = f.matches.size();
      std::size_t j = 0;
      for (const auto& m : f.matches) {
        while (j < ms.matches.size() && ms.matches[j].query_idx != m.query_idx) ++j;
        REQUIRE(j < ms.matches.size());
        CHECK(ms.matches[j].train_idx == m.train_idx);
        CHECK(ms.matches[j].distance == m.distance);
      }
      for (std::size_t k = 1; k < f.matches.size(); ++k) CHECK(f.matches[k - 1].query_idx < f.matches[k].query_idx);
    }
  }
}

TEST_CASE("property: exhaustive scan agrees with an independent oracle") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const int nq = 1 + static_cast<int>(rng() % 50), nt = 1 + static_cast<int>(rng() % 200);
    const bool binary = trial % 2 == 0;
    const FeatureSet q = binary ? random_binary_set(rng, nq) : random_float_set(rng, nq);
    const FeatureSet t = binary ? random_binary_set(rng, nt) : random_float_set(rng, nt);
    const MatchSet ms = brute_force_match(q, t);
    REQUIRE(ms.matches.size() == q.size());
    for (const auto& m : ms.matches) {
      const Oracle o = oracle_scan(q, m.query_idx, t);
      CHECK(m.distance == doctest::Approx(o.best).epsilon(1e-5));
      CHECK(m.train_idx >= 0);
      CHECK(m.train_idx < nt);
      if (nt == 1) {
        CHECK(!m.second_distance);
      } else {
        REQUIRE(m.second_distance);
        CHECK(*m.second_distance == doctest::Approx(o.second).epsilon(1e-5));
        CHECK(m.distance <= *m.second_distance);
      }
      if (binary) CHECK(m.train_idx == o.best_idx);
    }
  }
}

TEST_CASE("property: permuting the train set permutes train indices only") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const bool binary = trial % 2 == 1;
    const FeatureSet q = binary ? random_binary_set(rng, 20) : random_float_set(rng, 20);
    const FeatureSet t = binary ? random_binary_set(rng, 25) : random_float_set(rng, 25);
    std::vector<int> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const FeatureSet tp = permuted(t, perm);
    const MatchSet a = brute_force_match(q, t), b = brute_force_match(q, tp);
    REQUIRE(a.matches.size() == b.matches.size());
    for (std::size_t i = 0; i < a.matches.size(); ++i) {
      CHECK(a.matches[i].distance == doctest::Approx(b.matches[i].distance).epsilon(1e-6));
      CHECK(*a.matches[i].second_distance == doctest::Approx(*b.matches[i].second_distance).epsilon(1e-6));
      if (a.matches[i].distance < *a.matches[i].second_distance) {
        CHECK(perm[b.matches[i].train_idx] == a.matches[i].train_idx);
      }
    }
  }
}

TEST_CASE("cross-check keeps only mutual nearest neighbours") {
  std::mt19937_64 rng(8);
  const FeatureSet q = random_float_set(rng, 40), t = random_float_set(rng, 30);
  const MatchSet plain = brute_force_match(q, t);
  const MatchSet mutual = brute_force_match(q, t, true);
  CHECK(mutual.matches.size() <= plain.matches.size());
  const MatchSet back = brute_force_match(t, q);
  for (const auto& m : mutual.matches) CHECK(back.matches[m.train_idx].train_idx == m.query_idx);
}

TEST_CASE("to_correspondences") {
  std::vector<Keypoint> qk = {{1, 2, 1, 0, 1, 0}, {3, 4, 1, 0, 1, 0}};
  std::vector<Keypoint> tk = {{10, 20, 1, 0, 1, 0}, {30, 40, 1, 0, 1, 0}};
  MatchSet ms;
  Match m0, m1;
  m0.query_idx = 0;
  m0.train_idx = 1;
  m1.query_idx = 1;
  m1.train_idx = 0;
  ms.matches = {m0, m1};
  const auto raw = to_correspondences(ms, qk, tk);
  REQUIRE(raw.size() == 2);
  CHECK(raw[0].src == Point2{1, 2});
  CHECK(raw[0].dst == Point2{30, 40});
  const auto shifted = to_correspondences(ms, qk, tk, {100, 200});
  CHECK(shifted[0].dst == Point2{130, 240});
  CHECK(shifted[1].dst == Point2{110, 220});
  CHECK(to_correspondences(MatchSet{}, qk, tk).empty());
  ms.matches[1].train_idx = 5;
  CHECK_THROWS_AS(to_correspondences(ms, qk, tk), Error);
}
