// Legacy ASCII VTK (unstructured grid, quad cells) output and a matching
// minimal reader for roundtrip audits. Nodes are written in mesh order with
// z = 0; point fields are all-node vectors (hanging nodes carry their
// interpolated values), cell fields are per-cell. The title line carries the
// config hash; all numbers keep 17 significant digits.
#pragma once

#include <string>
#include <vector>

#include "fracfem/mesh.hpp"

namespace fracfem {

struct VtkField {
  std::string name;
  std::vector<double> values;  // n_nodes (point field) or n_cells (cell field)
};

void write_vtk(const std::string& path, const MeshView& mv,
               const std::vector<VtkField>& point_fields,
               const std::vector<VtkField>& cell_fields,
               const std::string& config_hash);

struct VtkGrid {
  std::string title;
  std::vector<Point> points;
  std::vector<std::array<int, 4>> quads;  // VTK corner order (counterclockwise)
  std::vector<VtkField> point_fields;
  std::vector<VtkField> cell_fields;
};

// Parses files produced by write_vtk; throws std::runtime_error on anything
// it does not understand.
VtkGrid read_vtk(const std::string& path);

}  // namespace fracfem
