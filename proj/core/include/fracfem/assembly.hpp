// Elemental Q1 kernels and operator assembly.
//
// Everything is accumulated in extended precision with one discipline: a
// rounded double may only multiply a set of terms whose exact sum is zero
// as a *common* factor, and every individual product lands in the
// accumulator error-free (two_prod). Gradient sums like sum_a dN_a = 0
// hold pointwise as multisets of exactly-negating doubles, so elemental
// row and column sums vanish to the 2^-106 level and the assembled
// operator keeps A 1 = 0 and 1^T A = 0 structurally. The flux
// post-processing budget (1e-10 global balance) rests on this.
#pragma once

#include <array>
#include <vector>

#include "fracfem/dd.hpp"
#include "fracfem/fespace.hpp"
#include "fracfem/geometry.hpp"
#include "fracfem/linalg.hpp"

namespace fracfem {

// Gauss-Legendre rules on [0,1]; the 2x2 tensor rule integrates uncut Q1
// kernels exactly, cut cells sample materials on the 4x4 rule with no
// subcell integration.
struct QuadRule {
  const double* x;
  const double* w;
  int n;
};
QuadRule gauss2();
QuadRule gauss4();

using Mat4DD = std::array<std::array<DD, 4>, 4>;

// Restricted elemental block: rows/cols follow `dofs` (ascending).
struct ElemBlock {
  int n = 0;
  std::array<int, 8> dofs{};
  std::array<std::array<DD, 8>, 8> a{};
};

// True when (k, phi) is constant on the box; fills the constant values.
bool material_constant_on(const MaterialField& mat, const Box& box, double* k,
                          double* phi);

// Closed-form stiffness of a k-constant rectangle: entries are signed sums
// of two shared magnitudes per direction, so cancellations are exact.
void local_diffusion_const(double k, double hx, double hy, Mat4DD& out);
// 4x4-point stiffness with k sampled at quadrature points (cut cells).
void local_diffusion_qpoints(const MaterialField& mat, const Box& box, Mat4DD& out);

void local_mass_const(double phi, double hx, double hy, Mat4DD& out);
void local_mass_qpoints(const MaterialField& mat, const Box& box, Mat4DD& out);

// Advective kernel A_ab = -int N_b (u . grad N_a) with the Darcy velocity
// u = -k grad p_h evaluated at quadrature points.
void local_advection(const FESpace& fs, std::size_t cell, const MaterialField& mat,
                     const std::vector<double>& p_r, Mat4DD& out);

// B = R_E L R_E^T through the cell's hanging-node expansions (restriction
// weights are dyadic, so these products are error-free).
ElemBlock restrict_block(const FESpace::CellCoupling& cc, const Mat4DD& local);

// Discrete diffusion operator of a dense block: s_ij = -max(0, a_ij, a_ji)
// off the diagonal, diagonal fixed by zero row sums. Symmetric, zero row
// and column sums by construction.
void stabilize_block(const ElemBlock& a, ElemBlock& s);

// Elemental cell matrix for the flow operator (diffusion restricted per
// element; stabilization applied after restriction when requested).
// `s_out`, when non-null, receives only the stabilization part.
ElemBlock flow_cell_block(const FESpace& fs, const MaterialField& mat,
                          std::size_t cell, bool stabilize,
                          ElemBlock* s_out = nullptr);

void scatter_block(const ElemBlock& b, std::vector<Triplet>& out);

// Flow operator K (+ elemental stabilization); optional separate
// stabilization stream for diagnostics.
void assemble_flow_operator(const FESpace& fs, const MaterialField& mat,
                            bool stabilize, std::vector<Triplet>& a_out,
                            std::vector<Triplet>* s_out = nullptr);

// Porosity-weighted consistent mass.
void assemble_mass(const FESpace& fs, const MaterialField& mat,
                   std::vector<Triplet>& m_out);

// Discrete diffusion operator of an assembled matrix (transport is
// stabilized globally; stabilizing elemental contributions before
// assembly does not yield the maximum-principle structure there).
std::vector<Triplet> global_stabilization(const SparseDD& a);

}  // namespace fracfem
