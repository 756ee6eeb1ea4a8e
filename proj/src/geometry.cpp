#include "mosaic/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "mosaic/error.hpp"

namespace mosaic {

namespace {

constexpr double kTiny = 1e-12;

using Mat9 = std::array<std::array<double, 9>, 9>;

std::array<double, 9> multiply(const std::array<double, 9>& a, const std::array<double, 9>& b) {
  std::array<double, 9> r{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[i * 3 + k] * b[k * 3 + j];
      r[i * 3 + j] = s;
    }
  }
  return r;
}

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

// Uniform integer in [0, bound) from a 64-bit engine, independent of the
// standard library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % bound;
}

double triangle_area2(Point2 a, Point2 b, Point2 c) {
  return std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

// Any 3 of the 4 points (nearly) collinear, judged against the sample's bbox.
bool has_collinear_triple(const std::array<Point2, 4>& p) {
  double minx = p[0].x, maxx = p[0].x, miny = p[0].y, maxy = p[0].y;
  for (const auto& q : p) {
    minx = std::min(minx, q.x);
    maxx = std::max(maxx, q.x);
    miny = std::min(miny, q.y);
    maxy = std::max(maxy, q.y);
  }
  const double extent = std::max(maxx - minx, maxy - miny);
  const double limit = 1e-6 * extent * extent;
  static constexpr int kTriples[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
  for (const auto& t : kTriples) {
    if (0.5 * triangle_area2(p[t[0]], p[t[1]], p[t[2]]) < limit) return true;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// Homography

Homography::Homography() : h_{1, 0, 0, 0, 1, 0, 0, 0, 1} {}

Homography::Homography(const std::array<double, 9>& entries) {
  double max_abs = 0.0;
  for (double v : entries) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::DegenerateHomography, "homography has non-finite entries");
    }
    max_abs = std::max(max_abs, std::abs(v));
  }
  if (max_abs == 0.0 || std::abs(entries[8]) < kTiny * max_abs) {
    throw Error(ErrorKind::DegenerateHomography, "homography cannot be normalized by h33");
  }
  for (int i = 0; i < 9; ++i) h_[i] = entries[i] / entries[8];
  h_[8] = 1.0;
  if (!(std::abs(det3(h_)) > kTiny)) {
    throw Error(ErrorKind::DegenerateHomography, "homography is singular");
  }
}

Homography Homography::translation(double tx, double ty) {
  return Homography({1, 0, tx, 0, 1, ty, 0, 0, 1});
}

Homography Homography::similarity(double scale, double theta, double tx, double ty) {
  const double c = scale * std::cos(theta), s = scale * std::sin(theta);
  return Homography({c, -s, tx, s, c, ty, 0, 0, 1});
}

double Homography::determinant() const { return det3(h_); }

int RansacResult::inlier_count() const {
  return static_cast<int>(std::count(inlier_mask.begin(), inlier_mask.end(), true));
}

// ---------------------------------------------------------------------------
// Point mapping

Point2 apply_homography(const Homography& h, Point2 p) {
  const auto& m = h.entries();
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  if (std::abs(w) <= kTiny) {
    throw Error(ErrorKind::DegenerateProjection, "point maps to the line at infinity");
  }
  return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

double reprojection_error(const Homography& h, const Correspondence& c) {
  const Point2 q = apply_homography(h, c.src);
  return std::hypot(q.x - c.dst.x, q.y - c.dst.y);
}

NormalizedPoints normalize_points(const std::vector<Point2>& pts) {
  if (pts.size() < 2) {
    throw Error(ErrorKind::DegenerateConfiguration, "normalize_points needs at least 2 points");
  }
  double cx = 0.0, cy = 0.0;
  for (const auto& p : pts) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(pts.size());
  cy /= static_cast<double>(pts.size());
  double mean = 0.0;
  for (const auto& p : pts) mean += std::hypot(p.x - cx, p.y - cy);
  mean /= static_cast<double>(pts.size());
  if (!(mean > 0.0)) {
    throw Error(ErrorKind::DegenerateConfiguration, "all points coincide");
  }
  const double s = std::sqrt(2.0) / mean;
  NormalizedPoints out{{}, Homography({s, 0, -s * cx, 0, s, -s * cy, 0, 0, 1})};
  out.points.reserve(pts.size());
  for (const auto& p : pts) out.points.push_back({s * (p.x - cx), s * (p.y - cy)});
  return out;
}

// ---------------------------------------------------------------------------
// Linear algebra

SymmetricEigen9 jacobi_eigen(const Mat9& m) {
  Mat9 a = m;
  Mat9 v{};
  for (int i = 0; i < 9; ++i) v[i][i] = 1.0;

  double scale = 0.0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) scale += a[i][j] * a[i][j];

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 9; ++p)
      for (int q = p + 1; q < 9; ++q) off += a[p][q] * a[p][q];
    if (off <= 1e-34 * scale || off == 0.0) break;

    for (int p = 0; p < 9; ++p) {
      for (int q = p + 1; q < 9; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < 9; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 9; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        a[p][q] = a[q][p] = 0.0;
        for (int k = 0; k < 9; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::array<int, 9> order;
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] < a[j][j]; });
  SymmetricEigen9 out{};
  for (int r = 0; r < 9; ++r) {
    out.eigenvalues[r] = a[order[r]][order[r]];
    for (int k = 0; k < 9; ++k) out.eigenvectors[r][k] = v[k][order[r]];
  }
  return out;
}

Homography dlt_homography(const std::vector<Correspondence>& corrs, DltConditioning conditioning) {
  if (corrs.size() < 4) {
    throw Error(ErrorKind::InsufficientCorrespondences,
                "dlt_homography needs at least 4 correspondences, got " +
                    std::to_string(corrs.size()));
  }
  std::vector<Point2> src, dst;
  src.reserve(corrs.size());
  dst.reserve(corrs.size());
  for (const auto& c : corrs) {
    src.push_back(c.src);
    dst.push_back(c.dst);
  }
  Homography ts, td;
  if (conditioning == DltConditioning::Hartley) {
    auto ns = normalize_points(src);
    auto nd = normalize_points(dst);
    src = std::move(ns.points);
    dst = std::move(nd.points);
    ts = ns.transform;
    td = nd.transform;
  }

  Mat9 ata{};
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double x = src[i].x, y = src[i].y, u = dst[i].x, v = dst[i].y;
    const std::array<double, 9> r1{-x, -y, -1, 0, 0, 0, u * x, u * y, u};
    const std::array<double, 9> r2{0, 0, 0, -x, -y, -1, v * x, v * y, v};
    for (int a = 0; a < 9; ++a) {
      for (int b = a; b < 9; ++b) ata[a][b] += r1[a] * r1[b] + r2[a] * r2[b];
    }
  }
  for (int a = 0; a < 9; ++a)
    for (int b = 0; b < a; ++b) ata[a][b] = ata[b][a];

  const SymmetricEigen9 eig = jacobi_eigen(ata);
  const double largest = std::max(eig.eigenvalues[8], 0.0);
  if (!(eig.eigenvalues[1] > 1e-12 * largest)) {
    throw Error(ErrorKind::DegenerateConfiguration, "DLT design matrix has rank < 8");
  }
  const Homography hn(eig.eigenvectors[0]);
  if (conditioning == DltConditioning::None) return hn;
  return compose(invert(td), compose(hn, ts));
}

// ---------------------------------------------------------------------------
// RANSAC

RansacResult ransac_homography(const std::vector<Correspondence>& corrs, const RansacParams& params) {
  const std::size_t n = corrs.size();
  if (n < 4) {
    throw Error(ErrorKind::InsufficientCorrespondences,
                "ransac_homography needs at least 4 correspondences, got " + std::to_string(n));
  }
  if (!(params.confidence > 0.0 && params.confidence < 1.0) || !(params.threshold > 0.0) ||
      params.max_iterations < 1) {
    throw Error(ErrorKind::InvalidArgument, "ransac_homography: parameter out of range");
  }

  std::mt19937_64 rng(params.seed);
  const long max_draws = 10L * params.max_iterations;
  long draws = 0;
  int iterations = 0;
  long needed = params.max_iterations;

  bool have_model = false;
  Homography best_model;
  int best_count = 0;
  double best_mean = std::numeric_limits<double>::infinity();

  auto score = [&](const Homography& h, std::vector<bool>* mask, double* sum) {
    int count = 0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e;
      try {
        e = reprojection_error(h, corrs[i]);
      } catch (const Error&) {
        e = std::numeric_limits<double>::infinity();
      }
      const bool in = e <= params.threshold;
      if (mask) (*mask)[i] = in;
      if (in) {
        ++count;
        total += e;
      }
    }
    if (sum) *sum = total;
    return count;
  };

  std::array<std::size_t, 4> idx{};
  while (iterations < needed && draws < max_draws) {
    ++draws;
    for (int k = 0; k < 4; ++k) {
      bool fresh;
      do {
        idx[k] = bounded(rng, n);
        fresh = std::find(idx.begin(), idx.begin() + k, idx[k]) == idx.begin() + k;
      } while (!fresh);
    }
    std::array<Point2, 4> s, d;
    for (int k = 0; k < 4; ++k) {
      s[k] = corrs[idx[k]].src;
      d[k] = corrs[idx[k]].dst;
    }
    if (has_collinear_triple(s) || has_collinear_triple(d)) continue;

    Homography candidate;
    try {
      candidate = dlt_homography({corrs[idx[0]], corrs[idx[1]], corrs[idx[2]], corrs[idx[3]]});
    } catch (const Error&) {
      continue;
    }
    ++iterations;

    double sum = 0.0;
    const int count = score(candidate, nullptr, &sum);
    const double mean = count > 0 ? sum / count : std::numeric_limits<double>::infinity();
    if (count > best_count || (count == best_count && count > 0 && mean < best_mean)) {
      have_model = true;
      best_model = candidate;
      best_count = count;
      best_mean = mean;
      const double w = static_cast<double>(best_count) / static_cast<double>(n);
      const double w4 = w * w * w * w;
      if (w4 >= 1.0) {
        needed = 0;
      } else if (w4 > 0.0) {
        const double bound = std::ceil(std::log(1.0 - params.confidence) / std::log(1.0 - w4));
        needed = static_cast<long>(std::min<double>(bound, params.max_iterations));
      }
    }
  }

  if (!have_model) {
    throw Error(ErrorKind::DegenerateConfiguration, "every sampled minimal set was degenerate");
  }
  const int required = std::max(4, params.min_inliers);
  if (best_count < required) {
    throw Error(ErrorKind::NoConsensus, "best model has " + std::to_string(best_count) +
                                            " inliers, need " + std::to_string(required));
  }

  RansacResult result{best_model, std::vector<bool>(n, false), iterations};
  std::vector<Correspondence> inliers;
  inliers.reserve(static_cast<std::size_t>(best_count));
  std::vector<bool> sample_mask(n, false);
  score(best_model, &sample_mask, nullptr);
  for (std::size_t i = 0; i < n; ++i)
    if (sample_mask[i]) inliers.push_back(corrs[i]);
  try {
    result.model = dlt_homography(inliers);
  } catch (const Error&) {
    result.model = best_model;
  }
  const int refit_count = score(result.model, &result.inlier_mask, nullptr);
  if (refit_count < required) {
    throw Error(ErrorKind::NoConsensus, "refit model has " + std::to_string(refit_count) +
                                            " inliers, need " + std::to_string(required));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Algebra helpers

Homography compose(const Homography& a, const Homography& b) {
  try {
    return Homography(multiply(a.entries(), b.entries()));
  } catch (const Error& e) {
    throw Error(ErrorKind::SingularMatrix, std::string("compose: ") + e.what());
  }
}

Homography invert(const Homography& h) {
  const auto& m = h.entries();
  const double det = det3(m);
  if (!(std::abs(det) > kTiny)) throw Error(ErrorKind::SingularMatrix, "invert: singular matrix");
  const std::array<double, 9> adj{
      m[4] * m[8] - m[5] * m[7], m[2] * m[7] - m[1] * m[8], m[1] * m[5] - m[2] * m[4],
      m[5] * m[6] - m[3] * m[8], m[0] * m[8] - m[2] * m[6], m[2] * m[3] - m[0] * m[5],
      m[3] * m[7] - m[4] * m[6], m[1] * m[6] - m[0] * m[7], m[0] * m[4] - m[1] * m[3]};
  try {
    return Homography(adj);
  } catch (const Error& e) {
    throw Error(ErrorKind::SingularMatrix, std::string("invert: ") + e.what());
  }
}

double corner_transfer_error(const Homography& estimated, const Homography& reference, int width,
                             int height) {
  const Point2 corners[4] = {{0, 0},
                             {width - 1.0, 0},
                             {width - 1.0, height - 1.0},
                             {0, height - 1.0}};
  double total = 0.0;
  for (const auto& c : corners) {
    const Point2 a = apply_homography(estimated, c);
    const Point2 b = apply_homography(reference, c);
    total += std::hypot(a.x - b.x, a.y - b.y);
  }
  return total / 4.0;
}

std::string to_text(const Homography& h) {
  std::string out;
  char buf[40];
  for (int i = 0; i < 9; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", h.entries()[i]);
    if (i) out += ' ';
    out += buf;
  }
  return out;
}

Homography homography_from_text(const std::string& text) {
  std::istringstream in(text);
  std::array<double, 9> e{};
  for (auto& v : e) {
    if (!(in >> v)) throw Error(ErrorKind::ParseError, "expected 9 numbers in homography text");
  }
  std::string rest;
  if (in >> rest) throw Error(ErrorKind::ParseError, "trailing data after homography text");
  return Homography(e);
}

}  // namespace mosaic
