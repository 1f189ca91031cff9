// Sparse operators held in extended precision, plus a direct solver with
// extended-precision iterative refinement. The operator is assembled and
// stored as double-double so algebraic identities (zero column sums of the
// pre-elimination operator, residual cancellations in flux sums) survive;
// the LU factorization acts on the rounded copy and refinement recovers
// the extended-operator solution to working accuracy.
#pragma once

#include <memory>
#include <vector>

#include "fracfem/dd.hpp"

namespace fracfem {

struct Triplet {
  int r = 0;
  int c = 0;
  DD v;
};

struct SparseDD {
  int n = 0;  // square, n x n
  std::vector<int> rowptr;  // size n+1
  std::vector<int> col;     // sorted within each row
  std::vector<DD> val;

  static SparseDD from_triplets(int n, std::vector<Triplet> trips);

  int nnz() const { return static_cast<int>(col.size()); }
  // Index into col/val for entry (r, c), or -1 when not stored.
  int find(int r, int c) const;
  DD at(int r, int c) const;

  std::vector<double> values_double() const;
  std::vector<DD> multiply(const std::vector<double>& x) const;
  std::vector<DD> row_sums() const;
  std::vector<DD> col_sums() const;
  // max |A_ij - A_ji| over the stored pattern (pattern must be symmetric
  // for a zero result).
  double symmetry_error() const;
};

// Diagnostics for the discrete maximum principle: positive diagonal,
// non-positive off-diagonal entries, non-negative row sums, and at least
// one strictly positive row sum.
struct MMatrixReport {
  bool ok = false;
  double max_offdiag = 0.0;   // most positive off-diagonal entry
  double min_diag = 0.0;
  double min_row_sum = 0.0;
  double max_row_sum = 0.0;
  int n_pos_offdiag = 0;      // off-diagonals above tol
  int n_bad_rows = 0;         // row sums below -tol
};
MMatrixReport check_m_matrix(const SparseDD& A, double tol);

struct SolveStats {
  int ir_passes = 0;
  double residual_inf = 0.0;  // ||b - A x||_inf against the extended operator
  bool factorization_ok = false;
};

// Sparse LU on the rounded operator with refinement against the extended
// one. Factorize once, solve many right-hand sides (time stepping).
class DirectSolver {
 public:
  DirectSolver();
  ~DirectSolver();
  DirectSolver(DirectSolver&&) noexcept;
  DirectSolver& operator=(DirectSolver&&) noexcept;

  bool factorize(const SparseDD& A);
  bool ok() const;

  // x solving A x = b; `ir_passes` refinement sweeps with extended-precision
  // residuals (2-4 restore conservation identities to ~1e-12).
  std::vector<double> solve(const SparseDD& A, const std::vector<DD>& b,
                            int ir_passes, SolveStats* stats = nullptr) const;
  std::vector<double> solve(const SparseDD& A, const std::vector<double>& b,
                            int ir_passes, SolveStats* stats = nullptr) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Caps the worker-thread count of the underlying kernels (wired to the
// FRACFEM_THREADS environment variable by the command-line tool); values
// below 1 are ignored.
void set_thread_cap(int n);

}  // namespace fracfem
