#include "fracfem/assembly.hpp"

#include <algorithm>
#include <cmath>

namespace fracfem {

namespace {

const double kG2X[2] = {0.21132486540518712, 0.78867513459481288};
const double kG2W[2] = {0.5, 0.5};
const double kG4X[4] = {0.069431844202973714, 0.33000947820757187,
                        0.66999052179242813, 0.93056815579702629};
const double kG4W[4] = {0.17392742256872693, 0.32607257743127307,
                        0.32607257743127307, 0.17392742256872693};

// Shape values and local-coordinate derivatives at (s, t), corner order
// SW, SE, NW, NE. Derivative arrays are built from shared magnitudes so
// that opposing entries negate exactly.
inline void shapes(double s, double t, double sh[4]) {
  const double p = 1.0 - s, q = 1.0 - t;
  sh[0] = p * q;
  sh[1] = s * q;
  sh[2] = p * t;
  sh[3] = s * t;
}

inline void dshapes(double s, double t, double ds[4], double dt[4]) {
  const double p = 1.0 - s, q = 1.0 - t;
  ds[0] = -q;
  ds[1] = q;
  ds[2] = -t;
  ds[3] = t;
  dt[0] = -p;
  dt[1] = -s;
  dt[2] = p;
  dt[3] = s;
}

inline void symmetrize(Mat4DD& m) {
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      const DD avg = (m[a][b] + m[b][a]) * 0.5;
      m[a][b] = avg;
      m[b][a] = avg;
    }
}

}  // namespace

QuadRule gauss2() { return {kG2X, kG2W, 2}; }
QuadRule gauss4() { return {kG4X, kG4W, 4}; }

bool material_constant_on(const MaterialField& mat, const Box& box, double* k,
                          double* phi) {
  for (const auto& fr : mat.fractures)
    if (box_intersects_fracture(box, fr)) return false;
  for (const auto& rg : mat.regions) {
    const bool overlaps = std::min(box.x1, rg.box.x1) > std::max(box.x0, rg.box.x0) &&
                          std::min(box.y1, rg.box.y1) > std::max(box.y0, rg.box.y0);
    const bool inside = box.x0 >= rg.box.x0 && box.x1 <= rg.box.x1 &&
                        box.y0 >= rg.box.y0 && box.y1 <= rg.box.y1;
    if (overlaps && !inside) return false;
  }
  const auto kp = mat.at(box.center());
  if (k) *k = kp.first;
  if (phi) *phi = kp.second;
  return true;
}

void local_diffusion_const(double k, double hx, double hy, Mat4DD& out) {
  // entry(a,b) with a = 2j+i: k * [ (hy/hx) k1[ii'] m[jj'] + (hx/hy) m[ii'] k1[jj'] ],
  // m diag 1/3, off 1/6, k1 = +1 on the diagonal, -1 off. The two magnitudes
  // per direction are shared doubles, so row/column cancellations are exact.
  const double cx1 = k * (hy / hx) / 3.0, cx2 = 0.5 * cx1;
  const double cy1 = k * (hx / hy) / 3.0, cy2 = 0.5 * cy1;
  for (int a = 0; a < 4; ++a) {
    const int i = a & 1, j = a >> 1;
    for (int b = 0; b < 4; ++b) {
      const int i2 = b & 1, j2 = b >> 1;
      const double xterm = (i == i2 ? 1.0 : -1.0) * (j == j2 ? cx1 : cx2);
      const double yterm = (j == j2 ? 1.0 : -1.0) * (i == i2 ? cy1 : cy2);
      out[a][b] = two_sum(xterm, yterm);
    }
  }
}

void local_diffusion_qpoints(const MaterialField& mat, const Box& box, Mat4DD& out) {
  for (auto& row : out) row.fill(DD{});
  const double hx = box.width(), hy = box.height();
  const QuadRule g = gauss4();
  double ds[4], dt[4], gx[4], gy[4];
  for (int qj = 0; qj < g.n; ++qj)
    for (int qi = 0; qi < g.n; ++qi) {
      const double s = g.x[qi], t = g.x[qj];
      const Point pt{box.x0 + s * hx, box.y0 + t * hy};
      const double k = mat.at(pt).first;
      const double c = g.w[qi] * g.w[qj] * hx * hy * k;
      dshapes(s, t, ds, dt);
      for (int a = 0; a < 4; ++a) {
        gx[a] = ds[a] / hx;
        gy[a] = dt[a] / hy;
      }
      for (int a = 0; a < 4; ++a) {
        const double ux = c * gx[a], uy = c * gy[a];
        for (int b = 0; b < 4; ++b) {
          add_prod(out[a][b], ux, gx[b]);
          add_prod(out[a][b], uy, gy[b]);
        }
      }
    }
  symmetrize(out);
}

void local_mass_const(double phi, double hx, double hy, Mat4DD& out) {
  const double c1 = phi * hx * hy / 9.0, c2 = 0.5 * c1, c3 = 0.25 * c1;
  for (int a = 0; a < 4; ++a) {
    const int i = a & 1, j = a >> 1;
    for (int b = 0; b < 4; ++b) {
      const int i2 = b & 1, j2 = b >> 1;
      const int same = (i == i2 ? 1 : 0) + (j == j2 ? 1 : 0);
      out[a][b] = DD(same == 2 ? c1 : same == 1 ? c2 : c3);
    }
  }
}

void local_mass_qpoints(const MaterialField& mat, const Box& box, Mat4DD& out) {
  for (auto& row : out) row.fill(DD{});
  const double hx = box.width(), hy = box.height();
  const QuadRule g = gauss4();
  double sh[4];
  for (int qj = 0; qj < g.n; ++qj)
    for (int qi = 0; qi < g.n; ++qi) {
      const double s = g.x[qi], t = g.x[qj];
      const Point pt{box.x0 + s * hx, box.y0 + t * hy};
      const double phi = mat.at(pt).second;
      const double c = g.w[qi] * g.w[qj] * hx * hy * phi;
      shapes(s, t, sh);
      for (int a = 0; a < 4; ++a) {
        const double ca = c * sh[a];
        for (int b = 0; b < 4; ++b) add_prod(out[a][b], ca, sh[b]);
      }
    }
  symmetrize(out);
}

void local_advection(const FESpace& fs, std::size_t cell, const MaterialField& mat,
                     const std::vector<double>& p_r, Mat4DD& out) {
  for (auto& row : out) row.fill(DD{});
  const Box& box = fs.mesh->boxes[cell];
  const double hx = box.width(), hy = box.height();
  const QuadRule g = material_constant_on(mat, box, nullptr, nullptr) ? gauss2() : gauss4();
  double sh[4], ds[4], dt[4], gx[4], gy[4];
  for (int qj = 0; qj < g.n; ++qj)
    for (int qi = 0; qi < g.n; ++qi) {
      const double s = g.x[qi], t = g.x[qj];
      const Point pt{box.x0 + s * hx, box.y0 + t * hy};
      const double k = mat.at(pt).first;
      const Point gp = fs.eval_grad(cell, pt, p_r);
      const double ux = -k * gp.x, uy = -k * gp.y;
      const double c = g.w[qi] * g.w[qj] * hx * hy;
      shapes(s, t, sh);
      dshapes(s, t, ds, dt);
      for (int a = 0; a < 4; ++a) {
        gx[a] = ds[a] / hx;
        gy[a] = dt[a] / hy;
      }
      for (int b = 0; b < 4; ++b) {
        // column sums over the test index a cancel exactly: the factor is
        // common per b and the gradient multiset negates pairwise.
        const double cbx = -(c * sh[b]) * ux;
        const double cby = -(c * sh[b]) * uy;
        for (int a = 0; a < 4; ++a) {
          add_prod(out[a][b], cbx, gx[a]);
          add_prod(out[a][b], cby, gy[a]);
        }
      }
    }
}

ElemBlock restrict_block(const FESpace::CellCoupling& cc, const Mat4DD& local) {
  ElemBlock out;
  out.n = cc.n_dofs;
  out.dofs = cc.dofs;
  // permutation fast path: every corner is a regular dof
  bool perm_ok = (cc.n_dofs == 4);
  int perm[4] = {0, 0, 0, 0};
  if (perm_ok) {
    for (int p = 0; p < 4 && perm_ok; ++p) {
      int nz = -1;
      for (int c = 0; c < 4; ++c) {
        if (cc.r[p][c] == 0.0) continue;
        if (cc.r[p][c] != 1.0 || nz >= 0) {
          perm_ok = false;
          break;
        }
        nz = c;
      }
      if (nz < 0) perm_ok = false;
      perm[p] = nz;
    }
  }
  if (perm_ok) {
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) out.a[p][q] = local[perm[p]][perm[q]];
    return out;
  }
  for (int p = 0; p < out.n; ++p)
    for (int q = 0; q < out.n; ++q) {
      DD acc;
      for (int a = 0; a < 4; ++a) {
        if (cc.r[p][a] == 0.0) continue;
        for (int b = 0; b < 4; ++b) {
          if (cc.r[q][b] == 0.0) continue;
          // dyadic weights: the product below is an exact double and the
          // DD-by-double scaling is error-free
          acc += local[a][b] * (cc.r[p][a] * cc.r[q][b]);
        }
      }
      out.a[p][q] = acc;
    }
  return out;
}

void stabilize_block(const ElemBlock& a, ElemBlock& s) {
  s.n = a.n;
  s.dofs = a.dofs;
  for (auto& row : s.a) row.fill(DD{});
  for (int p = 0; p < a.n; ++p) {
    for (int q = p + 1; q < a.n; ++q) {
      // -max(0, a_pq, a_qp), carried as the full extended value of the
      // dominant entry so the stabilized off-diagonal cancels exactly
      const double vpq = a.a[p][q].value(), vqp = a.a[q][p].value();
      DD m;
      if (vpq >= vqp) {
        if (vpq <= 0.0) continue;
        m = -a.a[p][q];
      } else {
        if (vqp <= 0.0) continue;
        m = -a.a[q][p];
      }
      s.a[p][q] = m;
      s.a[q][p] = m;
      s.a[p][p] -= m;
      s.a[q][q] -= m;
    }
  }
}

ElemBlock flow_cell_block(const FESpace& fs, const MaterialField& mat,
                          std::size_t cell, bool stabilize, ElemBlock* s_out) {
  const Box& box = fs.mesh->boxes[cell];
  Mat4DD local;
  double k, phi;
  if (material_constant_on(mat, box, &k, &phi))
    local_diffusion_const(k, box.width(), box.height(), local);
  else
    local_diffusion_qpoints(mat, box, local);
  ElemBlock b = restrict_block(fs.cell_coupling(cell), local);
  if (s_out) {
    s_out->n = b.n;
    s_out->dofs = b.dofs;
    for (auto& row : s_out->a) row.fill(DD{});
  }
  if (stabilize) {
    ElemBlock s;
    stabilize_block(b, s);
    for (int p = 0; p < b.n; ++p)
      for (int q = 0; q < b.n; ++q) b.a[p][q] += s.a[p][q];
    if (s_out) *s_out = s;
  }
  return b;
}

void scatter_block(const ElemBlock& b, std::vector<Triplet>& out) {
  for (int p = 0; p < b.n; ++p)
    for (int q = 0; q < b.n; ++q) {
      const DD& v = b.a[p][q];
      if (v.hi == 0.0 && v.lo == 0.0) continue;
      out.push_back({b.dofs[p], b.dofs[q], v});
    }
}

void assemble_flow_operator(const FESpace& fs, const MaterialField& mat,
                            bool stabilize, std::vector<Triplet>& a_out,
                            std::vector<Triplet>* s_out) {
  const std::size_t n_cells = fs.mesh->cells.size();
  a_out.reserve(a_out.size() + 16 * n_cells);
  for (std::size_t e = 0; e < n_cells; ++e) {
    ElemBlock s;
    const ElemBlock b = flow_cell_block(fs, mat, e, stabilize, s_out ? &s : nullptr);
    scatter_block(b, a_out);
    if (s_out) scatter_block(s, *s_out);
  }
}

void assemble_mass(const FESpace& fs, const MaterialField& mat,
                   std::vector<Triplet>& m_out) {
  const std::size_t n_cells = fs.mesh->cells.size();
  m_out.reserve(m_out.size() + 16 * n_cells);
  for (std::size_t e = 0; e < n_cells; ++e) {
    const Box& box = fs.mesh->boxes[e];
    Mat4DD local;
    double k, phi;
    if (material_constant_on(mat, box, &k, &phi))
      local_mass_const(phi, box.width(), box.height(), local);
    else
      local_mass_qpoints(mat, box, local);
    scatter_block(restrict_block(fs.cell_coupling(e), local), m_out);
  }
}

std::vector<Triplet> global_stabilization(const SparseDD& a) {
  std::vector<Triplet> out;
  for (int r = 0; r < a.n; ++r)
    for (int k = a.rowptr[r]; k < a.rowptr[r + 1]; ++k) {
      const int c = a.col[k];
      if (c == r) continue;
      const int kt = a.find(c, r);
      if (kt >= 0 && c < r) continue;  // pair handled from the other side
      const DD arc = a.val[k];
      const DD acr = kt < 0 ? DD{} : a.val[kt];
      const double vrc = arc.value(), vcr = acr.value();
      DD m;  // -max(0, a_rc, a_cr) as the dominant entry's full extended value
      if (vrc >= vcr) {
        if (vrc <= 0.0) continue;
        m = -arc;
      } else {
        if (vcr <= 0.0) continue;
        m = -acr;
      }
      out.push_back({r, c, m});
      out.push_back({c, r, m});
      out.push_back({r, r, -m});
      out.push_back({c, c, -m});
    }
  return out;
}

}  // namespace fracfem
