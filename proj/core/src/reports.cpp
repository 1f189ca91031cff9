#include "fracfem/reports.hpp"

#include <fmt/format.h>
#include <fmt/os.h>

#include <cmath>
#include <stdexcept>

namespace fracfem {

int locate_cell(const MeshView& mv, Point p) {
  for (std::size_t c = 0; c < mv.n_cells(); ++c)
    if (mv.boxes[c].contains(p)) return int(c);
  return -1;
}

LineSample sample_line(const FESpace& fs, const std::vector<double>& c_r, Point a,
                       Point b, int n) {
  if (n < 2) throw std::runtime_error("sample_line needs n >= 2");
  const MeshView& mv = *fs.mesh;
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (len <= 0.0) throw std::runtime_error("sample_line needs distinct endpoints");

  LineSample out;
  out.a = a;
  out.b = b;
  out.s.reserve(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    const double t = double(i) / double(n - 1);
    Point p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    int cell = locate_cell(mv, p);
    if (cell < 0)
      throw std::runtime_error(
          fmt::format("sample point ({}, {}) lies outside the mesh", p.x, p.y));
    out.s.push_back(t * len);
    out.x.push_back(p.x);
    out.y.push_back(p.y);
    out.v.push_back(fs.eval(std::size_t(cell), p, c_r));
  }
  return out;
}

void write_line_sample(const std::string& path, const std::string& config_hash,
                       const std::string& field_name, const LineSample& sample) {
  fmt::ostream out = fmt::output_file(path);
  out.print("# fracfem config={}\n", config_hash);
  out.print("# line ({:.17g}, {:.17g}) -> ({:.17g}, {:.17g})\n", sample.a.x, sample.a.y,
            sample.b.x, sample.b.y);
  out.print("s,x,y,{}\n", field_name);
  for (std::size_t i = 0; i < sample.s.size(); ++i)
    out.print("{:.17g},{:.17g},{:.17g},{:.17g}\n", sample.s[i], sample.x[i], sample.y[i],
              sample.v[i]);
}

void write_flux_report(const std::string& path, const std::string& config_hash,
                       const FluxReport& report) {
  fmt::ostream out = fmt::output_file(path);
  out.print("# fracfem config={}\n", config_hash);
  out.print("quantity,value\n");
  out.print("dirichlet_outflow,{:.17g}\n", report.dirichlet_outflow);
  out.print("neumann_inflow,{:.17g}\n", report.neumann_inflow);
  out.print("balance_error,{:.17g}\n", report.balance_error);
  out.print("\n");
  out.print("interface,q_side1,q_side2,imbalance,rows\n");
  for (const FluxReport::Row& row : report.rows)
    out.print("{},{:.17g},{:.17g},{:.17g},{}\n", row.id, row.flux.q_side1, row.flux.q_side2,
              row.flux.imbalance, row.flux.n_rows);
}

void write_dmp_monitor(const std::string& path, const std::string& config_hash,
                       const TransportResult& result) {
  fmt::ostream out = fmt::output_file(path);
  out.print("# fracfem config={}\n", config_hash);
  out.print("# global_min={:.17g} global_max={:.17g} steps={}\n", result.global_min,
            result.global_max, result.n_steps);
  out.print("step,t,c_min,c_max,mass\n");
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const TransportStepRecord& rec = result.history[i];
    out.print("{},{:.17g},{:.17g},{:.17g},{:.17g}\n", i, rec.t, rec.c_min, rec.c_max,
              rec.mass);
  }
}

}  // namespace fracfem
