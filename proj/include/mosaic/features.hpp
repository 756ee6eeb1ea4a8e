#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mosaic/image.hpp"

namespace mosaic {

struct Keypoint {
  float x = 0;            // sub-pixel column in source image pixels
  float y = 0;            // sub-pixel row
  float scale = 0;        // sigma (SIFT) or pyramid scale (ORB), source pixels
  float orientation = 0;  // radians in [0, 2pi), y axis pointing down
  float response = 0;
  int octave = 0;         // SIFT octave or ORB pyramid level
};

enum class DescriptorKind { Float128, Binary256 };

using BinaryDescriptor = std::array<std::uint64_t, 4>;

/// Keypoints with a parallel list of descriptors of a single kind. Float
/// descriptors are stored contiguously, 128 per keypoint.
struct FeatureSet {
  DescriptorKind kind = DescriptorKind::Float128;
  std::vector<Keypoint> keypoints;
  std::vector<float> float_descriptors;
  std::vector<BinaryDescriptor> binary_descriptors;
  double extraction_time = 0.0;  // seconds

  std::size_t size() const { return keypoints.size(); }
  bool empty() const { return keypoints.empty(); }
  std::span<const float, 128> float_descriptor(std::size_t i) const {
    return std::span<const float, 128>(float_descriptors.data() + i * 128, 128);
  }
};

// --- scale space ----------------------------------------------------------

/// Separable Gaussian blur, kernel radius ceil(3 sigma), mirrored borders
/// (edge pixel not repeated).
Plane gaussian_blur(const Plane& src, double sigma);

struct ScaleSpace {
  int octaves = 0;
  int scales_per_octave = 0;
  double sigma0 = 0;
  std::vector<std::vector<Plane>> gaussians;  // [octave][scales + 3]
  std::vector<std::vector<Plane>> dogs;       // [octave][scales + 2]

  /// Blur of gaussians[o][level] relative to its own octave's sampling grid.
  double level_sigma(int level) const;
};

/// Octave count is reduced until min(w, h) >= 2^octaves * 16.
ScaleSpace build_scale_space(const Plane& luma, int octaves, int scales_per_octave, double sigma0,
                             double assumed_blur = 0.5);

// --- detectors --------------------------------------------------------------

struct SiftParams {
  int octaves = 4;
  int scales_per_octave = 3;
  double sigma0 = 1.6;
  double assumed_blur = 0.5;
  double contrast_threshold = 0.03;  // on [0, 1] luma
  double edge_ratio = 10.0;
  int max_keypoints = 8000;
};

/// Keypoints never come closer than this many octave pixels to the border.
inline constexpr int kSiftBorder = 8;

FeatureSet detect_sift(const Image& img, const SiftParams& params = {});

struct OrbParams {
  int fast_threshold = 20;
  int levels = 8;
  double scale_factor = 1.2;
  int max_keypoints = 5000;
  int edge_threshold = 31;
};

FeatureSet detect_orb(const Image& img, const OrbParams& params = {});

/// FAST-9 segment test on an 8-bit luma image, 3x3 non-maximum suppressed by
/// segment score. Pixels closer than `border` to an edge are skipped.
struct FastCorner {
  int x;
  int y;
  int score;
};
std::vector<FastCorner> fast9_corners(const Image& luma, int threshold, int border = 3);

/// Sampling pairs for the 256 binary tests, each (x1, y1, x2, y2) in [-15, 15].
/// Generated once from seed 0x9E3779B9 (see orb_pattern.cpp) and shipped as a table.
extern const std::array<std::array<std::int8_t, 4>, 256> kOrbPattern;

// --- debug dump -------------------------------------------------------------

/// One keypoint per line `x y scale orientation response octave`, followed on
/// the same line by ` | ` and the descriptor (hex for binary, 128 reals for float).
void write_feature_dump(std::ostream& out, const FeatureSet& fs);
FeatureSet read_feature_dump(std::istream& in);

}  // namespace mosaic
