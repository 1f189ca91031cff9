// Run orchestration shared by the command-line tool and the test drivers:
// mesh -> flow -> flux post-processing -> line samples -> transport, with
// artifact files written under the configured output directory.
#pragma once

#include <string>
#include <vector>

#include "fracfem/config.hpp"
#include "fracfem/reports.hpp"

namespace fracfem {

// Generated meshes that fail their audit raise SolverError (internal bug);
// imported meshes that fail theirs, or whose extent disagrees with
// [domain], raise ConfigError (bad input).
MeshView build_mesh_from_config(const RunConfig& cfg);

struct RunSummary {
  MeshAudit mesh_audit;
  int n_nodes = 0, n_cells = 0, n_dofs = 0;

  bool flow_ran = false;
  double p_min = 0.0, p_max = 0.0;
  double dirichlet_outflow = 0.0;
  double neumann_inflow = 0.0;
  double balance_error = 0.0;
  MMatrixReport flow_matrix;
  std::vector<FluxReport::Row> fluxes;

  bool transport_ran = false;
  double c_min = 0.0, c_max = 0.0;  // over all steps
  int n_steps = 0;

  std::vector<std::string> files;  // written artifacts, relative to out_dir
};

// Full run into cfg.out_dir; `mesh_only` stops after mesh.vtk.
RunSummary run_pipeline(const RunConfig& cfg, bool mesh_only = false);

// Mesh + flow only; resolves `id` against [post.interface] entries (unknown
// id raises ConfigError naming the configured ids). No files written.
InterfaceFlux compute_interface_flux(const RunConfig& cfg, const std::string& id);

}  // namespace fracfem
