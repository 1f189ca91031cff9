// Adaptively refined quadrilateral meshes: a quadtree forest over an
// nx-by-ny base grid with 2:1 (one-irregular) balance, plus a flat
// element/node view shared by generated and imported meshes.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fracfem/geometry.hpp"

namespace fracfem {

// Flat conforming-or-1-irregular mesh view consumed by the FE space and
// assembly: axis-aligned rectangular cells with corner nodes ordered
// SW, SE, NW, NE, plus mid-edge hanging-node constraints.
struct MeshView {
  Box domain;
  std::vector<Point> nodes;
  std::vector<std::array<int, 4>> cells;  // SW,SE,NW,NE node ids
  std::vector<Box> boxes;                 // per-cell geometry

  struct Hanging {
    int node;  // mid-edge node
    int ma, mb;  // endpoints of the coarse edge it hangs on
  };
  std::vector<Hanging> hangings;

  std::size_t n_nodes() const { return nodes.size(); }
  std::size_t n_cells() const { return cells.size(); }
};

struct MeshAudit {
  bool ok = true;
  std::string detail;          // first failure description, empty if ok
  double area_rel_error = 0.0; // |sum leaf areas - domain area| / area
  int max_level_jump = 0;      // max edge-neighbor level difference
  int hanging_nodes = 0;
  int max_hanging_per_edge = 0;
};

class QuadMesh {
 public:
  QuadMesh(Box domain, int nx, int ny, int max_level = 12);

  // Split every leaf in `marked` (ids into cells()), adding closure splits
  // so the 2:1 balance is preserved.
  void refine(const std::vector<int>& marked);

  // One marking+refine sweep per step: a leaf is marked when its box
  // intersects any fracture of the field.
  void amr_against_fractures(const MaterialField& field, int steps);

  void uniform_refine(int steps);

  struct Cell {
    std::int32_t parent = -1;
    std::int32_t child0 = -1;  // children are child0..child0+3; -1 = leaf
    std::int16_t level = 0;
    std::int64_t gx = 0, gy = 0;  // origin in finest-grid integer units
  };

  const std::vector<Cell>& cells() const { return cells_; }
  bool is_leaf(int c) const { return cells_[std::size_t(c)].child0 < 0; }
  std::vector<int> leaves() const;
  Box cell_box(int c) const;
  Box domain() const { return domain_; }
  int base_nx() const { return nx_; }
  int base_ny() const { return ny_; }
  int max_level() const { return max_level_; }

  // Leaf id containing the probe point (points on shared edges resolve to
  // the cell on the +x/+y side, matching half-open cell extents).
  int locate_leaf(std::int64_t gx, std::int64_t gy) const;

  // Build the flat node/cell view with hanging constraints.
  MeshView view() const;

  MeshAudit audit() const;

 private:
  void split(int c);
  void split_with_closure(int c);
  std::int64_t cell_size(int c) const;

  Box domain_;
  int nx_, ny_, max_level_;
  std::int64_t scale_;  // 2^max_level_: base-cell edge in integer units
  std::vector<Cell> cells_;
};

// Tensor-product mesh from sorted coordinate lines (resolved meshes).
MeshView tensor_mesh(const std::vector<double>& x_lines,
                     const std::vector<double>& y_lines);

// Coordinate lines for a resolved fracture-band discretization: be+1
// uniform lines on [lo,hi]; per band [c-h, c+h] the uniform lines strictly
// inside the band are dropped and fe+1 equally spaced band lines inserted.
std::vector<double> band_lines(double lo, double hi, int be, int fe,
                               const std::vector<std::pair<double, double>>&
                                   bands);  // (center, half_width)

// Import a conforming mesh from CSV files: nodes.csv has one "x,y" row per
// node, cells.csv one "n0,n1,n2,n3" row per cell (corner order arbitrary;
// cells must be axis-aligned rectangles). Throws std::runtime_error on
// malformed input.
MeshView import_mesh_csv(const std::string& nodes_path,
                         const std::string& cells_path);

// Audit a flat view directly (used for imported meshes): rectangle cells,
// consistent node references, leaf-area sum, hanging-constraint geometry.
MeshAudit audit_view(const MeshView& mv);

}  // namespace fracfem
