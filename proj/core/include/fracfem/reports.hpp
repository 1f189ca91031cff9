// Line sampling of FE fields and the CSV report emitters. Every file starts
// with a `# fracfem config=<hash>` provenance line and all numbers carry 17
// significant digits, so conservation can be audited from the files alone.
#pragma once

#include <string>
#include <vector>

#include "fracfem/flow.hpp"
#include "fracfem/transport.hpp"

namespace fracfem {

// Leaf cell containing p (closed boxes, first match in cell order), or -1.
int locate_cell(const MeshView& mv, Point p);

struct LineSample {
  Point a{}, b{};
  std::vector<double> s;  // arc length from a, strictly increasing
  std::vector<double> x, y;
  std::vector<double> v;  // field values
};

// Evaluates the conforming interpolant of dof vector c_r at n equispaced
// points of [a, b]; throws std::runtime_error when a point leaves the mesh.
LineSample sample_line(const FESpace& fs, const std::vector<double>& c_r, Point a,
                       Point b, int n);

void write_line_sample(const std::string& path, const std::string& config_hash,
                       const std::string& field_name, const LineSample& sample);

struct FluxReport {
  double dirichlet_outflow = 0.0;
  double neumann_inflow = 0.0;  // int_{Gamma_N} h
  double balance_error = 0.0;
  struct Row {
    std::string id;
    InterfaceFlux flux;
  };
  std::vector<Row> rows;
};

void write_flux_report(const std::string& path, const std::string& config_hash,
                       const FluxReport& report);

void write_dmp_monitor(const std::string& path, const std::string& config_hash,
                       const TransportResult& result);

}  // namespace fracfem
