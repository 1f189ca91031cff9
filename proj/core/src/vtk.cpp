#include "fracfem/vtk.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fracfem {

void write_vtk(const std::string& path, const MeshView& mv,
               const std::vector<VtkField>& point_fields,
               const std::vector<VtkField>& cell_fields,
               const std::string& config_hash) {
  for (const VtkField& f : point_fields)
    if (f.values.size() != mv.n_nodes())
      throw std::runtime_error(fmt::format("point field '{}' has {} values for {} nodes", f.name,
                                           f.values.size(), mv.n_nodes()));
  for (const VtkField& f : cell_fields)
    if (f.values.size() != mv.n_cells())
      throw std::runtime_error(fmt::format("cell field '{}' has {} values for {} cells", f.name,
                                           f.values.size(), mv.n_cells()));

  fmt::ostream out = fmt::output_file(path);
  out.print("# vtk DataFile Version 3.0\n");
  out.print("fracfem config={}\n", config_hash);
  out.print("ASCII\n");
  out.print("DATASET UNSTRUCTURED_GRID\n");

  out.print("POINTS {} double\n", mv.n_nodes());
  for (const Point& p : mv.nodes) out.print("{:.17g} {:.17g} 0\n", p.x, p.y);

  // Corner order SW,SE,NW,NE becomes the counterclockwise quad SW,SE,NE,NW.
  out.print("CELLS {} {}\n", mv.n_cells(), 5 * mv.n_cells());
  for (const std::array<int, 4>& c : mv.cells)
    out.print("4 {} {} {} {}\n", c[0], c[1], c[3], c[2]);
  out.print("CELL_TYPES {}\n", mv.n_cells());
  for (std::size_t i = 0; i < mv.n_cells(); ++i) out.print("9\n");

  if (!point_fields.empty()) {
    out.print("POINT_DATA {}\n", mv.n_nodes());
    for (const VtkField& f : point_fields) {
      out.print("SCALARS {} double 1\n", f.name);
      out.print("LOOKUP_TABLE default\n");
      for (double v : f.values) out.print("{:.17g}\n", v);
    }
  }
  if (!cell_fields.empty()) {
    out.print("CELL_DATA {}\n", mv.n_cells());
    for (const VtkField& f : cell_fields) {
      out.print("SCALARS {} double 1\n", f.name);
      out.print("LOOKUP_TABLE default\n");
      for (double v : f.values) out.print("{:.17g}\n", v);
    }
  }
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw std::runtime_error(fmt::format("{}: malformed vtk file ({})", path, what));
}

}  // namespace

VtkGrid read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read file: {}", path));
  VtkGrid grid;

  std::string line;
  if (!std::getline(in, line) || line.rfind("# vtk DataFile", 0) != 0)
    bad(path, "missing header");
  if (!std::getline(in, grid.title)) bad(path, "missing title");
  if (!std::getline(in, line) || line != "ASCII") bad(path, "not ASCII");
  if (!std::getline(in, line) || line != "DATASET UNSTRUCTURED_GRID")
    bad(path, "not an unstructured grid");

  std::string tok;
  std::size_t n_points = 0;
  while (in >> tok) {
    if (tok == "POINTS") {
      std::string type;
      if (!(in >> n_points >> type)) bad(path, "POINTS header");
      grid.points.resize(n_points);
      for (std::size_t i = 0; i < n_points; ++i) {
        double z;
        if (!(in >> grid.points[i].x >> grid.points[i].y >> z)) bad(path, "POINTS data");
      }
    } else if (tok == "CELLS") {
      std::size_t n_cells = 0, n_ints = 0;
      if (!(in >> n_cells >> n_ints)) bad(path, "CELLS header");
      if (n_ints != 5 * n_cells) bad(path, "CELLS size (quads expected)");
      grid.quads.resize(n_cells);
      for (std::size_t i = 0; i < n_cells; ++i) {
        int count;
        if (!(in >> count) || count != 4) bad(path, "non-quad cell");
        for (int j = 0; j < 4; ++j)
          if (!(in >> grid.quads[i][std::size_t(j)])) bad(path, "CELLS data");
      }
    } else if (tok == "CELL_TYPES") {
      std::size_t n_cells = 0;
      if (!(in >> n_cells)) bad(path, "CELL_TYPES header");
      for (std::size_t i = 0; i < n_cells; ++i) {
        int type;
        if (!(in >> type) || type != 9) bad(path, "cell type is not quad");
      }
    } else if (tok == "POINT_DATA" || tok == "CELL_DATA") {
      std::size_t count = 0;
      if (!(in >> count)) bad(path, "data header");
      std::vector<VtkField>& dst =
          (tok == "POINT_DATA") ? grid.point_fields : grid.cell_fields;
      std::string kw;
      while (in >> kw) {
        if (kw != "SCALARS") bad(path, "expected SCALARS");
        VtkField f;
        std::string type;
        int comps = 1;
        if (!(in >> f.name >> type >> comps) || comps != 1) bad(path, "SCALARS header");
        std::string lut, name;
        if (!(in >> lut >> name) || lut != "LOOKUP_TABLE") bad(path, "missing lookup table");
        f.values.resize(count);
        for (std::size_t i = 0; i < count; ++i)
          if (!(in >> f.values[i])) bad(path, "scalar data");
        dst.push_back(std::move(f));
        // Peek: stop at the next section keyword.
        std::streampos at = in.tellg();
        if (!(in >> kw)) break;
        in.seekg(at);
        if (kw != "SCALARS") break;
      }
    } else {
      bad(path, fmt::format("unexpected token '{}'", tok));
    }
  }
  return grid;
}

}  // namespace fracfem
