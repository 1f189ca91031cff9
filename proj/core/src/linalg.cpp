#include "fracfem/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace fracfem {

SparseDD SparseDD::from_triplets(int n, std::vector<Triplet> trips) {
  std::sort(trips.begin(), trips.end(), [](const Triplet& a, const Triplet& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  SparseDD m;
  m.n = n;
  m.rowptr.assign(n + 1, 0);
  m.col.reserve(trips.size());
  m.val.reserve(trips.size());
  std::size_t i = 0;
  while (i < trips.size()) {
    const int r = trips[i].r, c = trips[i].c;
    DD acc = trips[i].v;
    ++i;
    while (i < trips.size() && trips[i].r == r && trips[i].c == c) {
      acc += trips[i].v;
      ++i;
    }
    m.col.push_back(c);
    m.val.push_back(acc);
    m.rowptr[r + 1]++;
  }
  for (int r = 0; r < n; ++r) m.rowptr[r + 1] += m.rowptr[r];
  return m;
}

int SparseDD::find(int r, int c) const {
  const int lo = rowptr[r], hi = rowptr[r + 1];
  auto it = std::lower_bound(col.begin() + lo, col.begin() + hi, c);
  if (it != col.begin() + hi && *it == c) return static_cast<int>(it - col.begin());
  return -1;
}

DD SparseDD::at(int r, int c) const {
  const int k = find(r, c);
  return k < 0 ? DD{} : val[k];
}

std::vector<double> SparseDD::values_double() const {
  std::vector<double> v(val.size());
  for (std::size_t k = 0; k < val.size(); ++k) v[k] = val[k].value();
  return v;
}

std::vector<DD> SparseDD::multiply(const std::vector<double>& x) const {
  std::vector<DD> y(n);
  for (int r = 0; r < n; ++r) {
    DD acc;
    for (int k = rowptr[r]; k < rowptr[r + 1]; ++k) {
      // full product of an extended entry with a double
      add_prod(acc, val[k].hi, x[col[k]]);
      acc += val[k].lo * x[col[k]];
    }
    y[r] = acc;
  }
  return y;
}

std::vector<DD> SparseDD::row_sums() const {
  std::vector<DD> s(n);
  for (int r = 0; r < n; ++r) {
    DD acc;
    for (int k = rowptr[r]; k < rowptr[r + 1]; ++k) acc += val[k];
    s[r] = acc;
  }
  return s;
}

std::vector<DD> SparseDD::col_sums() const {
  std::vector<DD> s(n);
  for (int r = 0; r < n; ++r)
    for (int k = rowptr[r]; k < rowptr[r + 1]; ++k) s[col[k]] += val[k];
  return s;
}

double SparseDD::symmetry_error() const {
  double worst = 0.0;
  for (int r = 0; r < n; ++r)
    for (int k = rowptr[r]; k < rowptr[r + 1]; ++k) {
      const DD d = val[k] - at(col[k], r);
      worst = std::max(worst, std::abs(d.value()));
    }
  return worst;
}

MMatrixReport check_m_matrix(const SparseDD& A, double tol) {
  MMatrixReport rep;
  rep.max_offdiag = -std::numeric_limits<double>::infinity();
  rep.min_diag = std::numeric_limits<double>::infinity();
  rep.min_row_sum = std::numeric_limits<double>::infinity();
  rep.max_row_sum = -std::numeric_limits<double>::infinity();
  bool diag_ok = true;
  for (int r = 0; r < A.n; ++r) {
    DD row;
    bool saw_diag = false;
    for (int k = A.rowptr[r]; k < A.rowptr[r + 1]; ++k) {
      const double v = A.val[k].value();
      row += A.val[k];
      if (A.col[k] == r) {
        saw_diag = true;
        rep.min_diag = std::min(rep.min_diag, v);
      } else {
        rep.max_offdiag = std::max(rep.max_offdiag, v);
        if (v > tol) rep.n_pos_offdiag++;
      }
    }
    if (!saw_diag) diag_ok = false;
    const double rs = row.value();
    rep.min_row_sum = std::min(rep.min_row_sum, rs);
    rep.max_row_sum = std::max(rep.max_row_sum, rs);
    if (rs < -tol) rep.n_bad_rows++;
  }
  rep.ok = diag_ok && rep.min_diag > 0.0 && rep.n_pos_offdiag == 0 &&
           rep.n_bad_rows == 0 && rep.max_row_sum > tol;
  return rep;
}

struct DirectSolver::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool ok = false;
};

DirectSolver::DirectSolver() : impl_(std::make_unique<Impl>()) {}
DirectSolver::~DirectSolver() = default;
DirectSolver::DirectSolver(DirectSolver&&) noexcept = default;
DirectSolver& DirectSolver::operator=(DirectSolver&&) noexcept = default;

bool DirectSolver::factorize(const SparseDD& A) {
  Eigen::SparseMatrix<double> m(A.n, A.n);
  std::vector<Eigen::Triplet<double>> tr;
  tr.reserve(A.col.size());
  for (int r = 0; r < A.n; ++r)
    for (int k = A.rowptr[r]; k < A.rowptr[r + 1]; ++k)
      tr.emplace_back(r, A.col[k], A.val[k].value());
  m.setFromTriplets(tr.begin(), tr.end());
  m.makeCompressed();
  impl_->lu.compute(m);
  impl_->ok = impl_->lu.info() == Eigen::Success;
  return impl_->ok;
}

bool DirectSolver::ok() const { return impl_->ok; }

namespace {

Eigen::VectorXd lu_solve(const Eigen::SparseLU<Eigen::SparseMatrix<double>>& lu,
                         const Eigen::VectorXd& b) {
  return lu.solve(b);
}

}  // namespace

std::vector<double> DirectSolver::solve(const SparseDD& A, const std::vector<DD>& b,
                                        int ir_passes, SolveStats* stats) const {
  const int n = A.n;
  Eigen::VectorXd b0(n);
  for (int i = 0; i < n; ++i) b0[i] = b[i].value();
  Eigen::VectorXd x = lu_solve(impl_->lu, b0);

  std::vector<double> xfin(n);
  for (int i = 0; i < n; ++i) xfin[i] = x[i];

  for (int pass = 0; pass < ir_passes; ++pass) {
    const std::vector<DD> ax = A.multiply(xfin);
    Eigen::VectorXd r(n);
    for (int i = 0; i < n; ++i) r[i] = (b[i] - ax[i]).value();
    const Eigen::VectorXd dx = lu_solve(impl_->lu, r);
    for (int i = 0; i < n; ++i) xfin[i] += dx[i];
  }
  if (stats) {
    const std::vector<DD> ax = A.multiply(xfin);
    double rf = 0.0;
    for (int i = 0; i < n; ++i) rf = std::max(rf, std::abs((b[i] - ax[i]).value()));
    stats->ir_passes = ir_passes;
    stats->residual_inf = rf;
    stats->factorization_ok = impl_->ok;
  }
  return xfin;
}

std::vector<double> DirectSolver::solve(const SparseDD& A, const std::vector<double>& b,
                                        int ir_passes, SolveStats* stats) const {
  std::vector<DD> bd(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) bd[i] = DD(b[i]);
  return solve(A, bd, ir_passes, stats);
}

void set_thread_cap(int n) {
  if (n >= 1) Eigen::setNbThreads(n);
}

}  // namespace fracfem
