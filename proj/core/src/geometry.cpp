#include "fracfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracfem {

Point Fracture::axis() const { return {std::cos(angle), std::sin(angle)}; }
Point Fracture::normal() const { return {-std::sin(angle), std::cos(angle)}; }

std::array<Point, 4> Fracture::corners() const {
  Point u = axis(), v = normal();
  auto at = [&](double s, double t) {
    return Point{center.x + s * u.x + t * v.x, center.y + s * u.y + t * v.y};
  };
  return {at(-half_length, -half_aperture), at(half_length, -half_aperture),
          at(half_length, half_aperture), at(-half_length, half_aperture)};
}

bool Fracture::contains(Point p) const {
  double dx = p.x - center.x, dy = p.y - center.y;
  Point u = axis(), v = normal();
  double s = dx * u.x + dy * u.y;
  double t = dx * v.x + dy * v.y;
  return std::abs(s) < half_length && std::abs(t) < half_aperture;
}

Fracture Fracture::from_segment(Point a, Point b, double aperture) {
  Fracture f;
  f.center = {(a.x + b.x) / 2, (a.y + b.y) / 2};
  double dx = b.x - a.x, dy = b.y - a.y;
  f.half_length = std::hypot(dx, dy) / 2;
  f.half_aperture = aperture / 2;
  f.angle = std::atan2(dy, dx);
  return f;
}

Fracture Fracture::from_corners(const std::array<Point, 4>& c) {
  // Center is the mean; the long axis joins the midpoints of the two short
  // sides. Find the two independent edge vectors from corner 0.
  Point ctr{(c[0].x + c[1].x + c[2].x + c[3].x) / 4,
            (c[0].y + c[1].y + c[2].y + c[3].y) / 4};
  // Distances from corner 0 to the others; the two nearest span the edges.
  std::array<int, 3> others{1, 2, 3};
  std::sort(others.begin(), others.end(), [&](int i, int j) {
    double di = std::hypot(c[i].x - c[0].x, c[i].y - c[0].y);
    double dj = std::hypot(c[j].x - c[0].x, c[j].y - c[0].y);
    return di < dj;
  });
  Point e1{c[others[0]].x - c[0].x, c[others[0]].y - c[0].y};
  Point e2{c[others[1]].x - c[0].x, c[others[1]].y - c[0].y};
  double l1 = std::hypot(e1.x, e1.y), l2 = std::hypot(e2.x, e2.y);
  if (std::abs(e1.x * e2.x + e1.y * e2.y) > 1e-9 * l1 * l2)
    throw std::invalid_argument("fracture corners do not form a rectangle");
  Fracture f;
  f.center = ctr;
  if (l1 >= l2) {
    f.half_length = l1 / 2;
    f.half_aperture = l2 / 2;
    f.angle = std::atan2(e1.y, e1.x);
  } else {
    f.half_length = l2 / 2;
    f.half_aperture = l1 / 2;
    f.angle = std::atan2(e2.y, e2.x);
  }
  return f;
}

bool box_intersects_fracture(const Box& b, const Fracture& f) {
  // Separating axes: the box's x/y axes and the rectangle's axis/normal.
  // Intersection means positive overlap area, so projections that only
  // touch at an endpoint separate the shapes.
  auto fc = f.corners();
  // Box extents vs rectangle corners on x and y.
  double fxmin = fc[0].x, fxmax = fc[0].x, fymin = fc[0].y, fymax = fc[0].y;
  for (int i = 1; i < 4; ++i) {
    fxmin = std::min(fxmin, fc[i].x);
    fxmax = std::max(fxmax, fc[i].x);
    fymin = std::min(fymin, fc[i].y);
    fymax = std::max(fymax, fc[i].y);
  }
  if (fxmax <= b.x0 || fxmin >= b.x1 || fymax <= b.y0 || fymin >= b.y1)
    return false;
  // Rectangle's axes vs box corners.
  Point u = f.axis(), v = f.normal();
  std::array<Point, 4> bc{{{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}}};
  for (auto [ax, half] : {std::pair{u, f.half_length}, std::pair{v, f.half_aperture}}) {
    double pmin = 1e300, pmax = -1e300;
    for (auto& p : bc) {
      double s = (p.x - f.center.x) * ax.x + (p.y - f.center.y) * ax.y;
      pmin = std::min(pmin, s);
      pmax = std::max(pmax, s);
    }
    if (pmax <= -half || pmin >= half) return false;
  }
  return true;
}

int MaterialField::classify(Point p) const {
  for (std::size_t i = 0; i < fractures.size(); ++i)
    if (fractures[i].contains(p)) return static_cast<int>(i);
  for (std::size_t r = regions.size(); r-- > 0;)
    if (regions[r].box.contains(p)) return -(2 + static_cast<int>(r));
  return -1;  // base matrix
}

std::pair<double, double> MaterialField::at(Point p) const {
  int c = classify(p);
  if (c >= 0) return {fracture_k, fracture_phi};
  if (c == -1) return {matrix_k, matrix_phi};
  const MatrixRegion& r = regions[static_cast<std::size_t>(-c - 2)];
  return {r.k, r.phi};
}

bool MaterialField::box_intersects_any_fracture(const Box& b) const {
  for (const auto& f : fractures)
    if (box_intersects_fracture(b, f)) return true;
  return false;
}

double polygon_area(const Polygon& poly) {
  double s = 0.0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % n];
    s += a.x * b.y - b.x * a.y;
  }
  return std::abs(s) / 2;
}

Polygon clip_half_plane(const Polygon& poly, double a, double b, double c) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& p = poly[i];
    const Point& q = poly[(i + 1) % n];
    double fp = a * p.x + b * p.y - c;
    double fq = a * q.x + b * q.y - c;
    if (fp <= 0) out.push_back(p);
    if ((fp < 0 && fq > 0) || (fp > 0 && fq < 0)) {
      double t = fp / (fp - fq);
      out.push_back({p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)});
    }
  }
  return out;
}

double box_fracture_overlap_area(const Box& b, const Fracture& f) {
  Polygon poly{{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
  Point u = f.axis(), v = f.normal();
  double cu = f.center.x * u.x + f.center.y * u.y;
  double cv = f.center.x * v.x + f.center.y * v.y;
  struct HP { double a, b, c; };
  for (const HP& hp : {HP{u.x, u.y, cu + f.half_length},
                       HP{-u.x, -u.y, -(cu - f.half_length)},
                       HP{v.x, v.y, cv + f.half_aperture},
                       HP{-v.x, -v.y, -(cv - f.half_aperture)}}) {
    poly = clip_half_plane(poly, hp.a, hp.b, hp.c);
    if (poly.size() < 3) return 0.0;
  }
  return polygon_area(poly);
}

double box_half_plane_area(const Box& b, double a, double b_coef, double c) {
  Polygon poly{{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}};
  poly = clip_half_plane(poly, a, b_coef, c);
  return poly.size() < 3 ? 0.0 : polygon_area(poly);
}

}  // namespace fracfem
