#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "mosaic/error.hpp"
#include "mosaic/features.hpp"
#include "mosaic/harness.hpp"
#include "mosaic/io.hpp"
#include "test_util.hpp"

using namespace mosaic;

namespace {

SequenceParams small_params() {
  SequenceParams p;
  p.n_frames = 4;
  p.frame_width = 320;
  p.frame_height = 240;
  p.columns = 2;
  p.rot_jitter = 3;
  p.scale_jitter = 0.05;
  p.seed = 3;
  return p;
}

GroundTruthSequence make(const SequenceParams& p, std::uint64_t source_seed = 11) {
  const auto [w, h] = required_source_size(p);
  return generate_sequence(make_source(w, h, source_seed), p);
}

double bilinear(const Image& img, double x, double y, int c) {
  const int ix = std::min(static_cast<int>(std::floor(x)), img.width - 2);
  const int iy = std::min(static_cast<int>(std::floor(y)), img.height - 2);
  const double fx = x - ix, fy = y - iy;
  return (1 - fy) * ((1 - fx) * img.at(ix, iy, c) + fx * img.at(ix + 1, iy, c)) +
         fy * ((1 - fx) * img.at(ix, iy + 1, c) + fx * img.at(ix + 1, iy + 1, c));
}

}  // namespace

TEST_CASE("make_source determinism and seed sensitivity") {
  const Image a = make_source(1024, 1024, 1), b = make_source(1024, 1024, 1), c = make_source(1024, 1024, 2);
  CHECK(a == b);
  CHECK(a.channels == 3);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    differ += a.data[3 * i] != c.data[3 * i] || a.data[3 * i + 1] != c.data[3 * i + 1] ||
              a.data[3 * i + 2] != c.data[3 * i + 2];
  }
  CHECK(differ > a.pixel_count() / 2);
  CHECK_THROWS_AS(make_source(1000, 1024, 1), Error);
  CHECK(make_smooth_source(1024, 1024, 4) == make_smooth_source(1024, 1024, 4));
}

TEST_CASE("an 800x600 crop of the source carries at least 500 SIFT keypoints") {
  const Image src = make_source(1024, 1024, 1);
  Image crop(800, 600, 3);
  for (int y = 0; y < 600; ++y)
    for (int x = 0; x < 800; ++x)
      for (int c = 0; c < 3; ++c) crop.at(x, y, c) = src.at(100 + x, 200 + y, c);
  const auto n = detect_sift(crop).size();
  INFO("keypoints " << n);
  CHECK(n >= 500);
}

TEST_CASE("lawnmower steps") {
  SequenceParams p;
  p.frame_width = 800;
  p.frame_height = 600;
  p.overlap = 0.7;
  CHECK(horizontal_step(p) == doctest::Approx(240.0));
  CHECK(vertical_step(p) == doctest::Approx(180.0));
}

TEST_CASE("single frame without jitter is an axis-aligned crop") {
  SequenceParams p;
  p.n_frames = 1;
  p.frame_width = 200;
  p.frame_height = 100;
  const auto [w, h] = required_source_size(p);
  const Image src = make_source(w, h, 5);
  const GroundTruthSequence seq = generate_sequence(src, p);
  const Homography& gt = seq.gt[0];
  CHECK(gt(0, 0) == 1.0);
  CHECK(gt(0, 1) == 0.0);
  CHECK(gt(1, 0) == 0.0);
  CHECK(gt(2, 0) == 0.0);
  const double tx = gt(0, 2), ty = gt(1, 2);
  REQUIRE(tx == std::floor(tx));
  REQUIRE(ty == std::floor(ty));
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 200; ++x)
      for (int c = 0; c < 3; ++c)
        CHECK(seq.frames[0].at(x, y, c) == src.at(x + static_cast<int>(tx), y + static_cast<int>(ty), c));
}

TEST_CASE("frames re-render from ground truth") {
  SequenceParams p = small_params();
  const auto [w, h] = required_source_size(p);
  const Image src = make_source(w, h, 11);
  const GroundTruthSequence seq = generate_sequence(src, p);
  REQUIRE(seq.frames.size() == seq.gt.size());
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    double se = 0;
    const Image luma = to_luma(seq.frames[k]);
    for (int y = 0; y < p.frame_height; ++y) {
      for (int x = 0; x < p.frame_width; ++x) {
        const Point2 q = apply_homography(seq.gt[k], {double(x), double(y)});
        const double r = bilinear(src, q.x, q.y, 0), g = bilinear(src, q.x, q.y, 1), b = bilinear(src, q.x, q.y, 2);
        const double e = 0.299 * r + 0.587 * g + 0.114 * b - luma.at(x, y);
        se += e * e;
      }
    }
    const double rms = std::sqrt(se / (p.frame_width * p.frame_height));
    INFO("frame " << k << " rms " << rms);
    CHECK(rms < 1.0);
  }
}

TEST_CASE("property: ground truth is exact and independent of photometric options") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    SequenceParams p = small_params();
    p.n_frames = 6;
    p.seed = seed;
    const Homography gt = frame_pose(p, static_cast<int>(seed % 6), 2000, 2000);
    const Homography round = compose(invert(gt), gt);
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(round.entries()[i] - Homography::identity().entries()[i]) < 1e-12);
    SequenceParams noisy = p;
    noisy.noise_sigma = 4;
    noisy.photometric_jitter = 20;
    CHECK(frame_pose(noisy, static_cast<int>(seed % 6), 2000, 2000) == gt);
  }
  SequenceParams p = small_params();
  SequenceParams noisy = p;
  noisy.noise_sigma = 3;
  noisy.photometric_jitter = 15;
  const GroundTruthSequence a = make(p), b = make(noisy);
  CHECK(a.gt == b.gt);
  CHECK(a.frames[1] != b.frames[1]);
}

TEST_CASE("generator determinism") {
  SequenceParams p = small_params();
  p.noise_sigma = 2;
  p.photometric_jitter = 10;
  const GroundTruthSequence a = make(p), b = make(p);
  CHECK(a.frames == b.frames);
  CHECK(a.gt == b.gt);
  p.seed = 4;
  CHECK(make(p).frames != a.frames);
}

TEST_CASE("poses that leave the source are rejected") {
  SequenceParams p = small_params();
  try {
    generate_sequence(make_source(1024, 1024, 1), [&] {
      SequenceParams big = p;
      big.frame_width = 1000;
      big.frame_height = 900;
      big.columns = 3;
      return big;
    }());
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::PoseEscapesSource);
  }
}

TEST_CASE("evaluate examples") {
  const GroundTruthSequence seq = make(small_params());
  std::vector<std::optional<Homography>> exact, shifted;
  for (int k = 0; k < 4; ++k) {
    exact.push_back(gt_frame_to_mosaic(seq, k));
    shifted.push_back(compose(gt_frame_to_mosaic(seq, k), Homography::translation(2, 0)));
  }
  CHECK(corner_transfer_error(gt_frame_to_mosaic(seq, 0), Homography::identity(), 320, 240) < 1e-9);
  const EvalReport e0 = evaluate(exact, seq);
  CHECK(e0.max_error < 1e-9);
  CHECK(e0.drift < 1e-9);
  CHECK(e0.stitched == 4);
  // Frame 0 is the reference, so its estimate is always exact.
  shifted[0] = Homography::translation(2, 0);
  const EvalReport e2 = evaluate(shifted, seq);
  for (const auto& v : e2.corner_error) {
    REQUIRE(v);
    CHECK(*v >= 0);
  }
  CHECK(*e2.corner_error[0] == doctest::Approx(2.0));
  for (int k = 1; k < 4; ++k) {
    const double s = std::sqrt(std::abs(gt_frame_to_mosaic(seq, k).determinant()));
    CHECK(*e2.corner_error[k] == doctest::Approx(2.0 * s).epsilon(1e-6));
  }

  std::vector<std::optional<Homography>> partial = exact;
  partial[2].reset();
  const EvalReport ep = evaluate(partial, seq);
  CHECK(ep.stitched == 3);
  CHECK(ep.rejected == 1);
  CHECK(!ep.corner_error[2]);
  CHECK_THROWS_AS(evaluate(std::vector<std::optional<Homography>>(3), seq), Error);
}

TEST_CASE("seam metric") {
  Mask seam(20, 10);
  for (int y = 2; y < 8; ++y) seam.at(9, y) = seam.at(10, y) = 1;
  CHECK(seam_metric(Image(20, 10, 3, 90), seam) == 0.0);

  Image step(20, 10, 1, 100);
  for (int y = 0; y < 10; ++y)
    for (int x = 10; x < 20; ++x) step.at(x, y) = 160;
  CHECK(seam_metric(step, seam) == doctest::Approx(240.0));

  Mask before(20, 10, 1), frame(20, 10, 0);
  for (int y = 0; y < 10; ++y)
    for (int x = 10; x < 20; ++x) frame.at(x, y) = 1;
  const Mask s = seam_mask(before, frame);
  CHECK(s.count() == 20u);
  // Sobel is zero on the image's outer ring: 16 of the 20 seam pixels see the step.
  CHECK(seam_metric(step, s) == doctest::Approx(240.0 * 16 / 20));

  CHECK_THROWS_AS(seam_metric(step, Mask(20, 10)), Error);
  CHECK_THROWS_AS(seam_metric(step, Mask(5, 5, 1)), Error);
}

TEST_CASE("ground truth and transform files round-trip") {
  const GroundTruthSequence seq = make(small_params());
  std::stringstream ss;
  write_gt(ss, seq);
  const GtFile g = read_gt(ss);
  CHECK(g.gt == seq.gt);
  CHECK(g.frame_width == 320);
  CHECK(g.frame_height == 240);

  std::istringstream sparse("0\n1 0 0 0 1 0 0 0 1\n2\n1 0 5 0 1 0 0 0 1\n");
  const auto t = read_transforms(sparse);
  REQUIRE(t.size() == 3);
  CHECK(t[0] == Homography::identity());
  CHECK(!t[1]);
  CHECK(t[2] == Homography::translation(5, 0));

  std::istringstream broken("0\n1 0 0 0 1\n");
  CHECK_THROWS_AS(read_transforms(broken), Error);
  std::istringstream gap("0\n1 0 0 0 1 0 0 0 1\n2\n1 0 0 0 1 0 0 0 1\n");
  CHECK_THROWS_AS(read_gt(gap), Error);

  const std::string csv = eval_csv(evaluate(std::vector<std::optional<Homography>>(4, Homography::identity()), seq));
  CHECK(csv.rfind("metric,value\n", 0) == 0);
  CHECK(csv.find("drift_px,") != std::string::npos);
}

TEST_CASE("write_sequence lays out frames and gt") {
  SequenceParams p = small_params();
  p.n_frames = 2;
  const GroundTruthSequence seq = make(p);
  const auto dir = std::filesystem::temp_directory_path() / "mosaic_test_write_sequence";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  write_sequence(dir.string(), seq);
  CHECK(read_image((dir / "frame_0000.ppm").string()) == seq.frames[0]);
  CHECK(read_image((dir / "frame_0001.ppm").string()) == seq.frames[1]);
  CHECK(std::filesystem::exists(dir / "gt.txt"));
  std::filesystem::remove_all(dir);
}
