#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mosaic {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

/// 3x3 projective transform stored row-major with h33 == 1.
///
/// Construction normalizes by h33 and rejects matrices that cannot be
/// normalized (|h33| < 1e-12 * max|hij|) or that are singular afterwards
/// (|det| <= 1e-12); both raise ErrorKind::DegenerateHomography.
class Homography {
 public:
  Homography();  // identity

  explicit Homography(const std::array<double, 9>& entries);

  static Homography identity() { return {}; }
  static Homography translation(double tx, double ty);
  /// s * R(theta) about the origin followed by a shift of (tx, ty).
  static Homography similarity(double scale, double theta, double tx, double ty);

  double operator()(int r, int c) const { return h_[static_cast<std::size_t>(r * 3 + c)]; }
  const std::array<double, 9>& entries() const { return h_; }
  double determinant() const;

  bool operator==(const Homography&) const = default;

 private:
  std::array<double, 9> h_;
};

struct Correspondence {
  Point2 src;
  Point2 dst;
};

struct RansacParams {
  double threshold = 3.0;
  int max_iterations = 2000;
  double confidence = 0.995;
  int min_inliers = 10;
  std::uint64_t seed = 0;
};

struct RansacResult {
  Homography model;
  std::vector<bool> inlier_mask;
  int iterations_run = 0;

  int inlier_count() const;
};

enum class DltConditioning { Hartley, None };

struct NormalizedPoints {
  std::vector<Point2> points;
  Homography transform;
};

/// Maps p through h. Throws DegenerateProjection when the homogeneous
/// denominator vanishes (|w| <= 1e-12).
Point2 apply_homography(const Homography& h, Point2 p);

/// Similarity that moves the centroid to the origin and the mean distance to sqrt(2).
NormalizedPoints normalize_points(const std::vector<Point2>& pts);

/// Least-squares algebraic fit over >= 4 correspondences. The smallest
/// eigenvector of the 9x9 normal matrix is taken as the solution.
Homography dlt_homography(const std::vector<Correspondence>& corrs,
                          DltConditioning conditioning = DltConditioning::Hartley);

double reprojection_error(const Homography& h, const Correspondence& c);

RansacResult ransac_homography(const std::vector<Correspondence>& corrs,
                               const RansacParams& params);

/// Matrix product a * b, i.e. apply b first.
Homography compose(const Homography& a, const Homography& b);
Homography invert(const Homography& h);

/// Mean corner displacement between two transforms of a w x h frame.
double corner_transfer_error(const Homography& estimated, const Homography& reference,
                             int width, int height);

/// Nine row-major numbers with 17 significant digits, space-separated.
std::string to_text(const Homography& h);
Homography homography_from_text(const std::string& text);

/// Symmetric eigen-decomposition by cyclic Jacobi rotations. Eigenvalues are
/// returned ascending; eigenvectors[i] pairs with eigenvalues[i].
struct SymmetricEigen9 {
  std::array<double, 9> eigenvalues;
  std::array<std::array<double, 9>, 9> eigenvectors;
};
SymmetricEigen9 jacobi_eigen(const std::array<std::array<double, 9>, 9>& m);

}  // namespace mosaic
