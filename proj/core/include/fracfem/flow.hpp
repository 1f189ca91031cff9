// Pressure solve and conservative flux post-processing.
//
// Convention: the load carries f(v) = -int_{Gamma_N} h v with h the
// prescribed outward normal velocity (inflow negative). The residual
// functional rho_i = f(N_i) - d(p_h, N_i), evaluated against the raw
// (pre-elimination) operator in extended precision, vanishes on free rows
// and carries the boundary flux on Dirichlet rows; its Dirichlet sum
// balances the Neumann inflow exactly in exact arithmetic.
#pragma once

#include <stdexcept>
#include <vector>

#include "fracfem/assembly.hpp"

namespace fracfem {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Boundary side: 0 = west (x = x0), 1 = east (x = x1), 2 = south (y = y0),
// 3 = north (y = y1). `lo`/`hi` bound the coordinate running along the
// side (y for west/east, x for south/north). Sides not covered by any
// segment default to no-flow.
struct BCSegment {
  int side = 0;
  double lo = 0.0;
  double hi = 0.0;
  bool dirichlet = false;
  double value = 0.0;  // pressure (Dirichlet) or outward normal velocity (Neumann)
};

struct FlowProblem {
  const FESpace* fs = nullptr;
  const MaterialField* mat = nullptr;
  std::vector<BCSegment> bcs;
  bool stabilize = true;
  int ir_passes = 3;
};

struct FlowSolution {
  const FESpace* fs = nullptr;
  std::vector<double> p;  // dof values (Dirichlet included)

  SparseDD a_raw;         // operator with untouched Dirichlet rows
  std::vector<DD> f;      // raw load functional
  std::vector<DD> rho;    // f - A p
  std::vector<char> is_dirichlet;
  std::vector<double> g;  // Dirichlet value per dof (0 on free dofs)
  DD neumann_total;       // int_{Gamma_N} h ds
  std::vector<BCSegment> bcs;  // kept for side-restricted re-assembly
  bool stabilized = true;

  SolveStats stats;
  MMatrixReport mmatrix;  // reduced free-free system

  // Net outflow through the Dirichlet boundary.
  DD dirichlet_flux() const;
  // |Q_D + int h|; the acceptance budget is 1e-10 (1 + |int h|).
  double balance_error() const;
};

FlowSolution solve_flow(const FlowProblem& prob);

// Net flux across an interface from side-restricted residual sums over the
// rows whose basis support touches the interface, Dirichlet rows excluded
// (their traces vanish there, and the Dirichlet flux weights belong to the
// outer boundary). Side 1 lies left of a->b; side 2 is the exact
// complement, so q1 + q2 is a pure solver-floor diagnostic.
struct InterfaceFlux {
  double q_side1 = 0.0;
  double q_side2 = 0.0;
  double imbalance = 0.0;
  int n_rows = 0;
};

InterfaceFlux interface_flux_segment(const FlowSolution& sol, const MaterialField& mat,
                                     Point a, Point b);

// Flux from the matrix (side 1) into the fracture bands (side 2) across
// the whole fracture-matrix interface; cells classified by center.
InterfaceFlux interface_flux_skeleton(const FlowSolution& sol, const MaterialField& mat);

// Pointwise flux density: a boundary-mass (lumped 1D hat) system driven by
// the residual functional. On the Dirichlet boundary this is the outward
// normal velocity; on an interface it is the side-1 outflow density.
struct FluxDensity {
  std::vector<int> dofs;
  std::vector<Point> where;
  std::vector<double> q;
};

FluxDensity dirichlet_flux_density(const FlowSolution& sol);

// Density along an axis-aligned interface segment (needs mesh edges on the
// segment; empty result otherwise).
FluxDensity interface_flux_density(const FlowSolution& sol, const MaterialField& mat,
                                   Point a, Point b);

}  // namespace fracfem
