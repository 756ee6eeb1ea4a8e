#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mosaic/geometry.hpp"
#include "mosaic/image.hpp"

namespace mosaic {

/// Half-open integer rectangle [x0, x1) x [y0, y1).
struct Rect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool contains(const Rect& r) const {
    return r.x0 >= x0 && r.y0 >= y0 && r.x1 <= x1 && r.y1 <= y1;
  }
  Rect intersect(const Rect& r) const;
  Rect translated(int dx, int dy) const { return {x0 + dx, y0 + dy, x1 + dx, y1 + dy}; }

  bool operator==(const Rect&) const = default;
};

/// Binary plane with the same layout as a 1-channel Image.
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 0 or 1

  Mask() = default;
  Mask(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}
  std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  std::size_t count() const;
  bool operator==(const Mask&) const = default;
};

struct WeightMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // incoming-frame weight in [0, 1]

  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// The growing mosaic. Mosaic coordinates are those of the first frame;
/// canvas pixel = mosaic point + origin.
struct MosaicCanvas {
  Image image;      // 3-channel
  Mask valid;       // pixel written by at least one frame
  Point2 origin;
  Rect last_frame_bbox;  // canvas coordinates
  int frames = 0;

  Rect extent() const { return {0, 0, image.width, image.height}; }
};

/// Canvas holding exactly `frame` (converted to RGB), origin (0, 0).
MosaicCanvas make_canvas(const Image& frame);

struct RoiImage {
  Image image;   // 3-channel copy, never-written pixels zeroed
  Rect rect;     // canvas coordinates
  Point2 offset; // canvas coordinates of the top-left corner
};

/// last_frame_bbox scaled by `factor` about its centre, clipped to the canvas.
RoiImage roi_extract(const MosaicCanvas& canvas, double factor);
/// The full canvas, used when the ROI mechanism is switched off.
RoiImage full_canvas_roi(const MosaicCanvas& canvas);
/// Unclipped scaled rectangle (exposed for the monotonicity property).
Rect scale_rect(const Rect& r, double factor);

struct WarpResult {
  Image warped;  // bbox-sized, same channel count as the frame
  Mask mask;
  Rect bbox;     // target coordinates
};

/// Integer hull of the frame's four pixel-centre corners under h.
Rect warped_bbox(const Homography& h, int width, int height);

/// Inverse-mapped bilinear warp of `frame` through h (frame -> target).
/// With `clip`, only the part of the hull inside the clip rectangle is rendered.
WarpResult warp_frame(const Image& frame, const Homography& h,
                      const std::optional<Rect>& clip = std::nullopt);

/// Chamfer 3-4 distance from the mask boundary (0 on boundary pixels), in pixel units.
std::vector<float> chamfer_distance(const Mask& mask);

/// d / min(d_max, feather_radius), clamped to [0, 1]; 0 outside the mask.
WeightMap distance_weight(const Mask& mask, double feather_radius = 64.0);

/// Sobel magnitude (unnormalized 3x3 kernels) of the luma plane.
/// Pixels whose 3x3 neighbourhood leaves `support` (when given) get 0.
std::vector<float> sobel_magnitude(const Image& region, const Mask* support = nullptr);

Mask dilate(const Mask& m, int radius);
Mask erode(const Mask& m, int radius);  // outside the plane counts as set
Mask morphological_close(const Mask& m, int radius);

/// Sobel edges above `rel_threshold` x the region maximum, closed with a
/// (2 * close_radius + 1)^2 square element.
Mask edge_complexity_mask(const Image& region, const Mask* support = nullptr,
                          double rel_threshold = 0.25, int close_radius = 2);

/// Blends the warped frame into the canvas region `warp.bbox` (canvas
/// coordinates). Frame-only pixels are copied, overlap pixels take
/// w' = min(1, w + edge_boost * edge) of the frame, canvas-only pixels are
/// untouched.
void alpha_blend(MosaicCanvas& canvas, const WarpResult& warp, const WeightMap& weights,
                 const Mask* edge_mask, double edge_boost);

/// Grows the canvas so that `needed` (canvas coordinates) fits, adding slack of
/// 25% of max(needed, canvas) size on each crossed side. Returns the shift
/// applied to canvas coordinates.
struct Shift {
  int dx = 0;
  int dy = 0;
};
Shift expand_canvas(MosaicCanvas& canvas, const Rect& needed, int max_dim = 20000);

}  // namespace mosaic
