// Domain geometry: box domain, fractures as oriented thin rectangles, and
// piecewise-constant material fields (conductivity k, porosity phi).
#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

namespace fracfem {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Axis-aligned box [x0,x1] x [y0,y1].
struct Box {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  Point center() const { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
  bool contains(Point p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
};

// Oriented thin rectangle: center, half-length along the long axis,
// half-aperture across it, and the long-axis angle from the x-axis.
struct Fracture {
  Point center;
  double half_length = 0.0;
  double half_aperture = 0.0;
  double angle = 0.0;

  // Long-axis direction and in-plane normal.
  Point axis() const;
  Point normal() const;
  std::array<Point, 4> corners() const;

  // Open-set membership (points exactly on the boundary are outside, so a
  // resolved band edge keeps edge-adjacent elements in the matrix).
  bool contains(Point p) const;

  // Build from the segment between two endpoints plus the full aperture.
  static Fracture from_segment(Point a, Point b, double aperture);
  // Build from 4 corners (any order); must form a rectangle.
  static Fracture from_corners(const std::array<Point, 4>& c);
};

// Separating-axis test between an axis-aligned box and an oriented
// rectangle; boundary contact counts as intersection.
bool box_intersects_fracture(const Box& b, const Fracture& f);

// Axis-aligned rectangular matrix region with its own (k, phi); regions are
// evaluated last-match-wins over a base matrix material.
struct MatrixRegion {
  Box box;
  double k = 1.0;
  double phi = 1.0;
};

// Region classification result: fracture index (>= 0) or matrix region
// encoded as -(1 + region_index); region_index 0 is the base matrix.
struct MaterialField {
  Box domain;
  double matrix_k = 1.0;
  double matrix_phi = 1.0;
  double fracture_k = 1.0;
  double fracture_phi = 1.0;
  std::vector<Fracture> fractures;
  std::vector<MatrixRegion> regions;  // overrides, last match wins

  int classify(Point p) const;
  std::pair<double, double> at(Point p) const;  // (k, phi)
  bool box_intersects_any_fracture(const Box& b) const;
};

// Convex polygon utilities used by the interface post-processing when a
// line or band cuts through element interiors.
using Polygon = std::vector<Point>;

double polygon_area(const Polygon& poly);

// Clip a convex polygon against the half-plane a*x + b*y <= c.
Polygon clip_half_plane(const Polygon& poly, double a, double b, double c);

// Area of box clipped to the fracture rectangle.
double box_fracture_overlap_area(const Box& b, const Fracture& f);

// Area of the part of the box on the side a*x + b*y <= c.
double box_half_plane_area(const Box& b, double a, double b_coef, double c);

}  // namespace fracfem
