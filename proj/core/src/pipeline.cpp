#include "fracfem/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "fracfem/fespace.hpp"
#include "fracfem/vtk.hpp"

namespace fracfem {

namespace {

FlowProblem flow_problem(const RunConfig& cfg, const FESpace& fs) {
  FlowProblem prob;
  prob.fs = &fs;
  prob.mat = &cfg.materials;
  prob.bcs = cfg.flow.bcs;
  prob.stabilize = cfg.flow.stabilize;
  prob.ir_passes = cfg.flow.ir_passes;
  return prob;
}

InterfaceFlux flux_for(const RunConfig::Interface& iface, const FlowSolution& sol,
                       const MaterialField& mat) {
  return iface.skeleton ? interface_flux_skeleton(sol, mat)
                        : interface_flux_segment(sol, mat, iface.a, iface.b);
}

}  // namespace

MeshView build_mesh_from_config(const RunConfig& cfg) {
  if (cfg.mesh.imported) {
    MeshView mv = import_mesh_csv(cfg.mesh.nodes_csv, cfg.mesh.cells_csv);
    MeshAudit audit = audit_view(mv);
    if (!audit.ok)
      throw ConfigError({fmt::format("imported mesh fails audit: {}", audit.detail)});
    const double tol =
        1e-9 * std::max({1.0, cfg.domain.width(), cfg.domain.height()});
    if (std::abs(mv.domain.x0 - cfg.domain.x0) > tol ||
        std::abs(mv.domain.y0 - cfg.domain.y0) > tol ||
        std::abs(mv.domain.x1 - cfg.domain.x1) > tol ||
        std::abs(mv.domain.y1 - cfg.domain.y1) > tol)
      throw ConfigError({fmt::format(
          "imported mesh extent [{}, {}] x [{}, {}] disagrees with [domain]", mv.domain.x0,
          mv.domain.x1, mv.domain.y0, mv.domain.y1)});
    mv.domain = cfg.domain;
    return mv;
  }
  QuadMesh qm(cfg.domain, cfg.mesh.be_x, cfg.mesh.be_y, cfg.mesh.max_level);
  qm.amr_against_fractures(cfg.materials, cfg.mesh.amr_steps);
  MeshAudit audit = qm.audit();
  if (!audit.ok)
    throw SolverError(fmt::format("generated mesh fails audit: {}", audit.detail));
  return qm.view();
}

RunSummary run_pipeline(const RunConfig& cfg, bool mesh_only) {
  namespace fs_sys = std::filesystem;
  RunSummary sum;
  const fs_sys::path out_dir(cfg.out_dir);
  fs_sys::create_directories(out_dir);

  auto artifact = [&](const std::string& rel) {
    sum.files.push_back(rel);
    return (out_dir / rel).string();
  };

  // ---- Mesh -----------------------------------------------------------------
  MeshView mv = build_mesh_from_config(cfg);
  sum.mesh_audit = audit_view(mv);
  sum.n_nodes = int(mv.n_nodes());
  sum.n_cells = int(mv.n_cells());

  {
    std::vector<VtkField> cell_fields(2);
    cell_fields[0].name = "permeability";
    cell_fields[1].name = "porosity";
    for (const Box& b : mv.boxes) {
      auto [k, phi] = cfg.materials.at(b.center());
      cell_fields[0].values.push_back(k);
      cell_fields[1].values.push_back(phi);
    }
    write_vtk(artifact("mesh.vtk"), mv, {}, cell_fields, cfg.hash_hex);
  }
  if (mesh_only) return sum;

  // ---- Flow -----------------------------------------------------------------
  FESpace space = build_fespace(mv);
  sum.n_dofs = space.n_r;
  FlowSolution flow = solve_flow(flow_problem(cfg, space));
  sum.flow_ran = true;
  const auto [p_lo, p_hi] = std::minmax_element(flow.p.begin(), flow.p.end());
  sum.p_min = *p_lo;
  sum.p_max = *p_hi;
  sum.dirichlet_outflow = flow.dirichlet_flux().value();
  sum.neumann_inflow = flow.neumann_total.value();
  sum.balance_error = flow.balance_error();
  sum.flow_matrix = flow.mmatrix;

  write_vtk(artifact("pressure.vtk"), mv, {{"pressure", space.prolongate(flow.p)}}, {},
            cfg.hash_hex);

  FluxReport report;
  report.dirichlet_outflow = sum.dirichlet_outflow;
  report.neumann_inflow = sum.neumann_inflow;
  report.balance_error = sum.balance_error;
  for (const RunConfig::Interface& iface : cfg.post.interfaces)
    report.rows.push_back({iface.id, flux_for(iface, flow, cfg.materials)});
  sum.fluxes = report.rows;
  write_flux_report(artifact("flux_report.csv"), cfg.hash_hex, report);

  // ---- Transport --------------------------------------------------------------
  TransportResult transport;
  if (cfg.transport.enabled) {
    TransportProblem prob;
    prob.fs = &space;
    prob.mat = &cfg.materials;
    prob.flow = &flow;
    prob.bcs = cfg.transport.bcs;
    prob.dt = cfg.transport.dt;
    prob.t_final = cfg.transport.t_final;
    prob.limiter = cfg.transport.limiter;
    prob.ir_passes = cfg.transport.ir_passes;
    prob.initial_value = cfg.transport.initial_value;
    prob.snapshot_times = cfg.transport.snapshot_times;
    transport = solve_transport(prob);
    sum.transport_ran = true;
    sum.c_min = transport.global_min;
    sum.c_max = transport.global_max;
    sum.n_steps = transport.n_steps;

    for (const auto& [t, c] : transport.snapshots)
      write_vtk(artifact(fmt::format("conc_{:g}.vtk", t)), mv,
                {{"concentration", space.prolongate(c)}}, {}, cfg.hash_hex);
    const bool final_snapshotted =
        !transport.snapshots.empty() &&
        std::abs(transport.snapshots.back().first - cfg.transport.t_final) <=
            1e-9 * cfg.transport.dt;
    if (!final_snapshotted)
      write_vtk(artifact(fmt::format("conc_{:g}.vtk", cfg.transport.t_final)), mv,
                {{"concentration", space.prolongate(transport.c)}}, {}, cfg.hash_hex);
    write_dmp_monitor(artifact("dmp_monitor.csv"), cfg.hash_hex, transport);
  }

  // ---- Line samples -------------------------------------------------------------
  if (!cfg.post.lines.empty()) fs_sys::create_directories(out_dir / "samples");
  for (const RunConfig::SampleLine& line : cfg.post.lines) {
    const std::vector<double>& field = line.concentration ? transport.c : flow.p;
    LineSample sample = sample_line(space, field, line.a, line.b, line.count);
    write_line_sample(artifact(fmt::format("samples/{}.csv", line.id)), cfg.hash_hex,
                      line.concentration ? "concentration" : "pressure", sample);
  }

  return sum;
}

InterfaceFlux compute_interface_flux(const RunConfig& cfg, const std::string& id) {
  const RunConfig::Interface* iface = nullptr;
  std::vector<std::string> known;
  for (const RunConfig::Interface& cand : cfg.post.interfaces) {
    known.push_back(cand.id);
    if (cand.id == id) iface = &cand;
  }
  if (!iface)
    throw ConfigError({fmt::format("unknown interface id '{}' (configured: {})", id,
                                   known.empty() ? "none" : fmt::format("{}", fmt::join(known, ", ")))});
  MeshView mv = build_mesh_from_config(cfg);
  FESpace space = build_fespace(mv);
  FlowSolution flow = solve_flow(flow_problem(cfg, space));
  return flux_for(*iface, flow, cfg.materials);
}

}  // namespace fracfem
