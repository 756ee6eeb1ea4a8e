#include "mosaic/compositor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mosaic/error.hpp"

namespace mosaic {

Rect Rect::intersect(const Rect& r) const {
  Rect out{std::max(x0, r.x0), std::max(y0, r.y0), std::min(x1, r.x1), std::min(y1, r.y1)};
  if (out.empty()) return {0, 0, 0, 0};
  return out;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

MosaicCanvas make_canvas(const Image& frame) {
  MosaicCanvas c;
  c.image = to_rgb(frame);
  c.valid = Mask(frame.width, frame.height, 1);
  c.origin = {0.0, 0.0};
  c.last_frame_bbox = {0, 0, frame.width, frame.height};
  c.frames = 1;
  return c;
}

// ---------------------------------------------------------------------------
// ROI

Rect scale_rect(const Rect& r, double factor) {
  const double cx = 0.5 * (r.x0 + r.x1), cy = 0.5 * (r.y0 + r.y1);
  const double hw = 0.5 * r.width() * factor, hh = 0.5 * r.height() * factor;
  return {static_cast<int>(std::floor(cx - hw)), static_cast<int>(std::floor(cy - hh)),
          static_cast<int>(std::ceil(cx + hw)), static_cast<int>(std::ceil(cy + hh))};
}

namespace {

RoiImage copy_region(const MosaicCanvas& canvas, const Rect& rect) {
  RoiImage roi;
  roi.rect = rect;
  roi.offset = {static_cast<double>(rect.x0), static_cast<double>(rect.y0)};
  roi.image = Image(rect.width(), rect.height(), 3);
  for (int y = rect.y0; y < rect.y1; ++y) {
    for (int x = rect.x0; x < rect.x1; ++x) {
      if (!canvas.valid.at(x, y)) continue;
      for (int c = 0; c < 3; ++c) roi.image.at(x - rect.x0, y - rect.y0, c) = canvas.image.at(x, y, c);
    }
  }
  return roi;
}

}  // namespace

RoiImage roi_extract(const MosaicCanvas& canvas, double factor) {
  if (canvas.frames < 1 || canvas.image.empty()) {
    throw Error(ErrorKind::EmptyCanvas, "roi_extract: canvas holds no frame");
  }
  if (!(factor >= 1.0)) throw Error(ErrorKind::InvalidArgument, "roi_extract: factor must be >= 1");
  const Rect rect = scale_rect(canvas.last_frame_bbox, factor).intersect(canvas.extent());
  return copy_region(canvas, rect);
}

RoiImage full_canvas_roi(const MosaicCanvas& canvas) {
  if (canvas.frames < 1 || canvas.image.empty()) {
    throw Error(ErrorKind::EmptyCanvas, "full_canvas_roi: canvas holds no frame");
  }
  return copy_region(canvas, canvas.extent());
}

// ---------------------------------------------------------------------------
// Warping

namespace {

std::array<Point2, 4> frame_corners(int width, int height) {
  return {Point2{0, 0}, Point2{width - 1.0, 0}, Point2{width - 1.0, height - 1.0},
          Point2{0, height - 1.0}};
}

}  // namespace

Rect warped_bbox(const Homography& h, int width, int height) {
  double minx = std::numeric_limits<double>::infinity(), miny = minx;
  double maxx = -minx, maxy = -minx;
  for (const auto& c : frame_corners(width, height)) {
    const Point2 p = apply_homography(h, c);
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  // Pixels whose centres lie inside the corner hull (with the warp's tolerance).
  constexpr double kEps = 1e-9;
  return {static_cast<int>(std::ceil(minx - kEps)), static_cast<int>(std::ceil(miny - kEps)),
          static_cast<int>(std::floor(maxx + kEps)) + 1, static_cast<int>(std::floor(maxy + kEps)) + 1};
}

WarpResult warp_frame(const Image& frame, const Homography& h, const std::optional<Rect>& clip) {
  const auto corners = frame_corners(frame.width, frame.height);
  std::array<Point2, 4> q;
  try {
    for (int i = 0; i < 4; ++i) q[static_cast<std::size_t>(i)] = apply_homography(h, corners[static_cast<std::size_t>(i)]);
  } catch (const Error& e) {
    throw Error(ErrorKind::DegenerateHomography, std::string("warp_frame: ") + e.what());
  }
  double area = 0.0;
  for (int i = 0; i < 4; ++i) {
    const Point2& a = q[static_cast<std::size_t>(i)];
    const Point2& b = q[static_cast<std::size_t>((i + 1) % 4)];
    area += a.x * b.y - b.x * a.y;
  }
  area = 0.5 * std::abs(area);
  const double frame_area = double(frame.width) * frame.height;
  if (!std::isfinite(area) || area >= 16.0 * frame_area || area <= 0.0) {
    throw Error(ErrorKind::DegenerateHomography, "warp_frame: warped quadrilateral area out of range");
  }

  Rect bbox = warped_bbox(h, frame.width, frame.height);
  if (clip) bbox = bbox.intersect(*clip);
  const Homography inv = invert(h);
  const auto& m = inv.entries();
  const int ch = frame.channels;
  WarpResult out{Image(bbox.width(), bbox.height(), ch), Mask(bbox.width(), bbox.height()), bbox};
  const double maxx = frame.width - 1.0, maxy = frame.height - 1.0;
  constexpr double kEps = 1e-9;

  for (int y = bbox.y0; y < bbox.y1; ++y) {
    for (int x = bbox.x0; x < bbox.x1; ++x) {
      const double w = m[6] * x + m[7] * y + m[8];
      if (std::abs(w) <= 1e-12) continue;
      double sx = (m[0] * x + m[1] * y + m[2]) / w;
      double sy = (m[3] * x + m[4] * y + m[5]) / w;
      if (sx < -kEps || sy < -kEps || sx > maxx + kEps || sy > maxy + kEps) continue;
      sx = std::clamp(sx, 0.0, maxx);
      sy = std::clamp(sy, 0.0, maxy);
      int ix = static_cast<int>(std::floor(sx)), iy = static_cast<int>(std::floor(sy));
      double fx = sx - ix, fy = sy - iy;
      if (ix >= frame.width - 1) {
        ix = std::max(frame.width - 2, 0);
        fx = sx - ix;
      }
      if (iy >= frame.height - 1) {
        iy = std::max(frame.height - 2, 0);
        fy = sy - iy;
      }
      const int ix1 = std::min(ix + 1, frame.width - 1), iy1 = std::min(iy + 1, frame.height - 1);
      const int ox = x - bbox.x0, oy = y - bbox.y0;
      for (int c = 0; c < ch; ++c) {
        const double top = (1.0 - fx) * frame.at(ix, iy, c) + fx * frame.at(ix1, iy, c);
        const double bot = (1.0 - fx) * frame.at(ix, iy1, c) + fx * frame.at(ix1, iy1, c);
        out.warped.at(ox, oy, c) = saturate_u8((1.0 - fy) * top + fy * bot);
      }
      out.mask.at(ox, oy) = 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weights

std::vector<float> chamfer_distance(const Mask& mask) {
  const int w = mask.width, h = mask.height;
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  std::vector<int> d(static_cast<std::size_t>(w) * h, 0);
  auto in = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && mask.at(x, y); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      const bool boundary = !in(x - 1, y) || !in(x + 1, y) || !in(x, y - 1) || !in(x, y + 1);
      d[static_cast<std::size_t>(y) * w + x] = boundary ? 0 : kInf;
    }
  }
  auto relax = [&](int x, int y, int nx, int ny, int cost) {
    if (!in(nx, ny)) return;
    int& v = d[static_cast<std::size_t>(y) * w + x];
    v = std::min(v, d[static_cast<std::size_t>(ny) * w + nx] + cost);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      relax(x, y, x - 1, y, 3);
      relax(x, y, x - 1, y - 1, 4);
      relax(x, y, x, y - 1, 3);
      relax(x, y, x + 1, y - 1, 4);
    }
  }
  for (int y = h - 1; y >= 0; --y) {
    for (int x = w - 1; x >= 0; --x) {
      if (!mask.at(x, y)) continue;
      relax(x, y, x + 1, y, 3);
      relax(x, y, x + 1, y + 1, 4);
      relax(x, y, x, y + 1, 3);
      relax(x, y, x - 1, y + 1, 4);
    }
  }
  std::vector<float> out(d.size(), 0.0f);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (mask.data[i]) out[i] = static_cast<float>(d[i] / 3.0);
  }
  return out;
}

WeightMap distance_weight(const Mask& mask, double feather_radius) {
  WeightMap wm{mask.width, mask.height, chamfer_distance(mask)};
  const float dmax = wm.data.empty() ? 0.0f : *std::max_element(wm.data.begin(), wm.data.end());
  const double denom = std::min<double>(dmax, feather_radius);
  for (std::size_t i = 0; i < wm.data.size(); ++i) {
    wm.data[i] = denom > 0.0 ? static_cast<float>(std::min(1.0, wm.data[i] / denom)) : 0.0f;
  }
  return wm;
}

// ---------------------------------------------------------------------------
// Edges and morphology

std::vector<float> sobel_magnitude(const Image& region, const Mask* support) {
  const Image luma = to_luma(region);
  const int w = luma.width, h = luma.height;
  std::vector<float> mag(static_cast<std::size_t>(w) * h, 0.0f);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      if (support) {
        bool inside = true;
        for (int dy = -1; dy <= 1 && inside; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            if (!support->at(x + dx, y + dy)) {
              inside = false;
              break;
            }
        if (!inside) continue;
      }
      auto p = [&](int dx, int dy) { return static_cast<int>(luma.at(x + dx, y + dy)); };
      const int gx = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      const int gy = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      mag[static_cast<std::size_t>(y) * w + x] = std::sqrt(static_cast<float>(gx * gx + gy * gy));
    }
  }
  return mag;
}

namespace {

// Separable square max/min filter. `outside` is the value assumed beyond the plane.
Mask square_filter(const Mask& m, int radius, bool take_max, std::uint8_t outside) {
  const int w = m.width, h = m.height;
  Mask tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = take_max ? 0 : 1;
      for (int k = -radius; k <= radius; ++k) {
        const int xx = x + k;
        const std::uint8_t s = (xx < 0 || xx >= w) ? outside : m.at(xx, y);
        v = take_max ? std::max(v, s) : std::min(v, s);
      }
      tmp.at(x, y) = v;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = take_max ? 0 : 1;
      for (int k = -radius; k <= radius; ++k) {
        const int yy = y + k;
        const std::uint8_t s = (yy < 0 || yy >= h) ? outside : tmp.at(x, yy);
        v = take_max ? std::max(v, s) : std::min(v, s);
      }
      out.at(x, y) = v;
    }
  }
  return out;
}

}  // namespace

Mask dilate(const Mask& m, int radius) { return square_filter(m, radius, true, 0); }
Mask erode(const Mask& m, int radius) { return square_filter(m, radius, false, 1); }
Mask morphological_close(const Mask& m, int radius) { return erode(dilate(m, radius), radius); }

Mask edge_complexity_mask(const Image& region, const Mask* support, double rel_threshold,
                          int close_radius) {
  if (region.width < 3 || region.height < 3) {
    throw Error(ErrorKind::ImageTooSmall, "edge_complexity_mask: region must be at least 3x3");
  }
  const auto mag = sobel_magnitude(region, support);
  const float peak = *std::max_element(mag.begin(), mag.end());
  Mask edges(region.width, region.height);
  if (peak <= 0.0f) return edges;
  const float thr = static_cast<float>(rel_threshold * peak);
  for (std::size_t i = 0; i < mag.size(); ++i) edges.data[i] = mag[i] > thr ? 1 : 0;
  return morphological_close(edges, close_radius);
}

// ---------------------------------------------------------------------------
// Blending and canvas growth

void alpha_blend(MosaicCanvas& canvas, const WarpResult& warp, const WeightMap& weights,
                 const Mask* edge_mask, double edge_boost) {
  const Rect& b = warp.bbox;
  const int bw = b.width(), bh = b.height();
  if (!canvas.extent().contains(b) || warp.warped.width != bw || warp.warped.height != bh ||
      warp.mask.width != bw || warp.mask.height != bh || weights.width != bw ||
      weights.height != bh || (edge_mask && (edge_mask->width != bw || edge_mask->height != bh))) {
    throw Error(ErrorKind::ShapeMismatch, "alpha_blend: inputs disagree on the blend region");
  }
  if (edge_boost < 0.0) throw Error(ErrorKind::InvalidArgument, "alpha_blend: edge_boost < 0");
  const Image frame = to_rgb(warp.warped);
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      if (!warp.mask.at(x, y)) continue;
      const int cx = x + b.x0, cy = y + b.y0;
      if (!canvas.valid.at(cx, cy)) {
        for (int c = 0; c < 3; ++c) canvas.image.at(cx, cy, c) = frame.at(x, y, c);
        canvas.valid.at(cx, cy) = 1;
        continue;
      }
      double wf = weights.at(x, y);
      if (edge_mask && edge_mask->at(x, y)) wf += edge_boost;
      wf = std::min(1.0, wf);
      const double wc = 1.0 - wf;
      for (int c = 0; c < 3; ++c) {
        canvas.image.at(cx, cy, c) = saturate_u8(wf * frame.at(x, y, c) + wc * canvas.image.at(cx, cy, c));
      }
    }
  }
}

Shift expand_canvas(MosaicCanvas& canvas, const Rect& needed, int max_dim) {
  const Rect ext = canvas.extent();
  if (ext.contains(needed)) return {};
  // Slack scales with the canvas so that reallocations stay amortized.
  const int slack_x = static_cast<int>(std::ceil(0.25 * std::max(needed.width(), ext.x1)));
  const int slack_y = static_cast<int>(std::ceil(0.25 * std::max(needed.height(), ext.y1)));
  const int left = needed.x0 < 0 ? -needed.x0 + slack_x : 0;
  const int top = needed.y0 < 0 ? -needed.y0 + slack_y : 0;
  const int right = needed.x1 > ext.x1 ? needed.x1 - ext.x1 + slack_x : 0;
  const int bottom = needed.y1 > ext.y1 ? needed.y1 - ext.y1 + slack_y : 0;
  const long nw = static_cast<long>(ext.x1) + left + right;
  const long nh = static_cast<long>(ext.y1) + top + bottom;
  if (nw > max_dim || nh > max_dim) {
    throw Error(ErrorKind::CanvasSizeLimit, "expand_canvas: " + std::to_string(nw) + "x" +
                                                std::to_string(nh) + " exceeds limit " +
                                                std::to_string(max_dim));
  }
  Image img(static_cast<int>(nw), static_cast<int>(nh), 3);
  Mask valid(static_cast<int>(nw), static_cast<int>(nh));
  for (int y = 0; y < ext.y1; ++y) {
    std::copy_n(canvas.image.data.begin() + static_cast<std::ptrdiff_t>(canvas.image.index(0, y)),
                3 * ext.x1, img.data.begin() + static_cast<std::ptrdiff_t>(img.index(left, y + top)));
    std::copy_n(canvas.valid.data.begin() + static_cast<std::ptrdiff_t>(y) * ext.x1, ext.x1,
                valid.data.begin() + static_cast<std::ptrdiff_t>(y + top) * nw + left);
  }
  canvas.image = std::move(img);
  canvas.valid = std::move(valid);
  canvas.origin.x += left;
  canvas.origin.y += top;
  canvas.last_frame_bbox = canvas.last_frame_bbox.translated(left, top);
  return {left, top};
}

}  // namespace mosaic
