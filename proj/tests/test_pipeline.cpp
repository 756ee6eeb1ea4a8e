#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mosaic/error.hpp"
#include "mosaic/harness.hpp"
#include "mosaic/pipeline.hpp"
#include "test_util.hpp"

using namespace mosaic;

namespace {

const GroundTruthSequence& pair_sequence() {
  static const GroundTruthSequence seq = [] {
    SequenceParams p;
    p.n_frames = 2;
    p.frame_width = 400;
    p.frame_height = 300;
    p.columns = 2;
    p.overlap = 0.7;
    p.seed = 5;
    const auto [sw, sh] = required_source_size(p);
    return generate_sequence(make_source(sw, sh, 5), p);
  }();
  return seq;
}

const GroundTruthSequence& short_flight() {
  static const GroundTruthSequence seq = [] {
    SequenceParams p;
    p.n_frames = 6;
    p.frame_width = 400;
    p.frame_height = 300;
    p.columns = 3;
    p.rot_jitter = 2;
    p.scale_jitter = 0.03;
    p.noise_sigma = 1.5;
    p.seed = 8;
    const auto [sw, sh] = required_source_size(p);
    return generate_sequence(make_source(sw, sh, 8), p);
  }();
  return seq;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected mosaic::Error");
  return ErrorKind::Io;
}

}  // namespace

TEST_CASE("init") {
  std::mt19937_64 rng(1);
  const Image frame = mosaic::testing::random_image(rng, 800, 600, 3);
  const MosaicState s = init(frame, {});
  CHECK(s.canvas.image == frame);
  CHECK(s.canvas.image.width == 800);
  CHECK(s.last_transform == Homography::identity());
  CHECK(s.frames_stitched == 1);
  CHECK(s.canvas.last_frame_bbox == Rect{0, 0, 800, 600});
  REQUIRE(s.reports.size() == 1);
  CHECK(s.reports[0].status == FrameStatus::Stitched);

  PipelineConfig half;
  half.scale = 0.5;
  const MosaicState h = init(frame, half);
  CHECK(h.canvas.image.width == 400);
  CHECK(h.canvas.image.height == 300);

  CHECK(kind_of([&] { init(Image(32, 32, 3), {}); }) == ErrorKind::FrameTooSmall);
  PipelineConfig bad;
  bad.ratio = 1.5;
  CHECK(kind_of([&] { init(frame, bad); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("config validation") {
  const auto invalid = [](auto mutate) {
    PipelineConfig c;
    mutate(c);
    return kind_of([&] { c.validate(); }) == ErrorKind::InvalidArgument;
  };
  CHECK_NOTHROW(PipelineConfig{}.validate());
  CHECK(invalid([](PipelineConfig& c) { c.scale = 0; }));
  CHECK(invalid([](PipelineConfig& c) { c.scale = 1.5; }));
  CHECK(invalid([](PipelineConfig& c) { c.ratio = 0; }));
  CHECK(invalid([](PipelineConfig& c) { c.roi_factor = 0.5; }));
  CHECK(invalid([](PipelineConfig& c) { c.edge_boost = -0.1; }));
  CHECK(invalid([](PipelineConfig& c) { c.ransac.min_inliers = 3; }));
}

TEST_CASE("a copy of the first frame registers to identity") {
  const Image& f = pair_sequence().frames[0];
  MosaicState s = init(f, {});
  const Rect bbox = s.canvas.last_frame_bbox;
  const FrameReport r = stitch_next(s, f);
  REQUIRE(r.status == FrameStatus::Stitched);
  CHECK(corner_transfer_error(*r.homography, Homography::identity(), f.width, f.height) < 0.5);
  CHECK(s.canvas.image.width == f.width);
  CHECK(s.canvas.image.height == f.height);
  CHECK(s.canvas.origin == Point2{0, 0});
  CHECK(s.canvas.last_frame_bbox == bbox);
  CHECK(s.frames_stitched == 2);
}

TEST_CASE("a frame shifted by 120 px registers to ground truth") {
  const GroundTruthSequence& seq = pair_sequence();
  CHECK(horizontal_step(seq.params) == doctest::Approx(120.0));
  MosaicState s = init(seq.frames[0], {});
  const FrameReport r = stitch_next(s, seq.frames[1]);
  REQUIRE(r.status == FrameStatus::Stitched);
  const Homography gt = gt_frame_to_mosaic(seq, 1);
  CHECK(gt(0, 2) == doctest::Approx(120.0).epsilon(1e-9));
  CHECK(corner_transfer_error(*r.homography, gt, 400, 300) < 1.0);
  CHECK(s.canvas.image.width > 400);
}

TEST_CASE("a noise frame is rejected and leaves the state untouched") {
  const Image& f = pair_sequence().frames[0];
  MosaicState s = init(f, {});
  std::mt19937_64 rng(77);
  // Blocky noise still yields keypoints, just none that agree with the canvas.
  Image noise(f.width, f.height, 3);
  const Image cells = mosaic::testing::random_image(rng, f.width / 4 + 1, f.height / 4 + 1, 3);
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      for (int c = 0; c < 3; ++c) noise.at(x, y, c) = cells.at(x / 4, y / 4, c);
  const MosaicCanvas before = s.canvas;
  const Homography t = s.last_transform;
  const FrameReport r = stitch_next(s, noise);
  CHECK(r.status == FrameStatus::Rejected);
  CHECK(r.reason == "no-consensus");
  CHECK(!r.homography);
  CHECK(s.canvas.image == before.image);
  CHECK(s.canvas.valid == before.valid);
  CHECK(s.canvas.origin == before.origin);
  CHECK(s.canvas.last_frame_bbox == before.last_frame_bbox);
  CHECK(s.last_transform == t);
  CHECK(s.frames_stitched == 1);
  CHECK(s.frames_seen == 2);
  CHECK(s.reports.size() == 2);
}

TEST_CASE("sanity gates") {
  CHECK(!sanity_gates({Homography::identity(), 800, 600, 100}, 10));
  CHECK(sanity_gates({Homography::identity(), 800, 600, 5}, 10) == "min-inliers");
  const Homography mirror({-1, 0, 799, 0, 1, 0, 0, 0, 1});
  CHECK(mirror.determinant() < 0);
  CHECK(sanity_gates({mirror, 800, 600, 100}, 10) == "non-convex");
  CHECK(sanity_gates({Homography::similarity(3, 0, 0, 0), 800, 600, 100}, 10) == "area-ratio");
  CHECK(sanity_gates({Homography::similarity(0.4, 0, 0, 0), 800, 600, 100}, 10) == "area-ratio");
  CHECK(!sanity_gates({Homography::similarity(1.9, 0, 0, 0), 800, 600, 100}, 10));
  // Diagonal is 1000 px: a 1600 px jump exceeds 1.5 diagonals.
  CHECK(sanity_gates({Homography::translation(1600, 0), 800, 600, 100}, 10) == "corner-displacement");
  CHECK(!sanity_gates({Homography::translation(1600, 0), 800, 600, 100}, 10, Homography::translation(1000, 0)));
  // Bow-tie: two corners swapped by a strong perspective term.
  const Homography bow = dlt_homography({{{0, 0}, {0, 0}},
                                          {{799, 0}, {799, 599}},
                                          {{799, 599}, {700, 100}},
                                          {{0, 599}, {0, 599}}});
  CHECK(sanity_gates({bow, 800, 600, 100}, 10).has_value());
}

TEST_CASE("run_sequence examples") {
  const GroundTruthSequence& seq = short_flight();
  const MosaicState one = run_sequence(std::vector<Image>{seq.frames[0]}, {});
  CHECK(render_mosaic(one) == seq.frames[0]);

  std::vector<Image> dark = {seq.frames[0], Image(400, 300, 3, 0), Image(400, 300, 3, 0)};
  const MosaicState d = run_sequence(dark, {});
  CHECK(d.frames_stitched == 1);
  CHECK(d.reports[1].status == FrameStatus::Rejected);
  CHECK(d.reports[2].status == FrameStatus::Rejected);
  CHECK(render_mosaic(d) == seq.frames[0]);

  CHECK(kind_of([] { run_sequence(std::vector<Image>{}, {}); }) == ErrorKind::EmptyInput);
}

TEST_CASE("short flight: accounting, accuracy and determinism") {
  const GroundTruthSequence& seq = short_flight();
  PipelineConfig cfg;
  cfg.snapshot_every = 2;
  std::vector<int> snapshots;
  const MosaicState a = run_sequence(seq.frames, cfg, [&](const MosaicState&, int k) { snapshots.push_back(k); });
  CHECK(a.frames_stitched == 6);
  CHECK(snapshots == std::vector<int>{1, 3, 5});
  const EvalReport ev = evaluate(a, seq);
  CHECK(ev.max_error < 1.5);

  for (const auto& r : a.reports) {
    CHECK(r.matches_ratio <= r.matches_raw);
    CHECK(r.inliers <= r.matches_ratio);
    const StageTimings& t = r.timings;
    for (double v : {t.feature_extraction, t.matching, t.ransac, t.warping, t.blending, t.total}) CHECK(v >= 0);
    CHECK(t.total >= t.feature_extraction + t.matching + t.ransac + t.warping + t.blending - 1e-6);
    if (r.frame_index > 0 && r.status == FrameStatus::Stitched) CHECK(r.inliers >= cfg.ransac.min_inliers);
  }

  const MosaicState b = run_sequence(seq.frames, cfg);
  CHECK(render_mosaic(a) == render_mosaic(b));
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    CHECK(a.reports[i].homography == b.reports[i].homography);
    CHECK(a.reports[i].inliers == b.reports[i].inliers);
    CHECK(a.reports[i].keypoints_roi == b.reports[i].keypoints_roi);
  }
  CHECK(transforms_text(a.reports) == transforms_text(b.reports));
}

TEST_CASE("ORB pipeline stitches the short flight") {
  PipelineConfig cfg;
  cfg.detector = DetectorKind::Orb;
  const MosaicState s = run_sequence(short_flight().frames, cfg);
  CHECK(s.frames_stitched == 6);
  CHECK(evaluate(s, short_flight()).max_error < 3.0);
}

TEST_CASE("timing CSV and transforms text") {
  const GroundTruthSequence& seq = pair_sequence();
  const MosaicState s = run_sequence(seq.frames, {});
  const std::string csv = timing_csv(s.reports);
  CHECK(csv.rfind("frame,status,keypoints_frame,keypoints_roi,matches_raw,matches_ratio,inliers,"
                  "t_features,t_matching,t_ransac,t_warp,t_blend,t_total\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  const std::string tt = transforms_text(s.reports);
  CHECK(tt.rfind("0\n", 0) == 0);
  CHECK(status_string(s.reports[0]) == "stitched");
  FrameReport rej;
  rej.status = FrameStatus::Rejected;
  rej.reason = "min-inliers";
  CHECK(status_string(rej).find("min-inliers") != std::string::npos);
}
