#include "fracfem/flow.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace fracfem {

namespace {

double geom_tol(const Box& dom) {
  return 1e-12 * std::max({1.0, dom.width(), dom.height()});
}

bool on_side(const Box& dom, int side, Point p, double tol) {
  switch (side) {
    case 0: return std::abs(p.x - dom.x0) <= tol;
    case 1: return std::abs(p.x - dom.x1) <= tol;
    case 2: return std::abs(p.y - dom.y0) <= tol;
    default: return std::abs(p.y - dom.y1) <= tol;
  }
}

double along_coord(int side, Point p) { return side <= 1 ? p.y : p.x; }

// Boundary edges of a cell: local corner pairs per side (W, E, S, N).
struct EdgeOnSide {
  int corner_lo;  // corner at the lower along-coordinate
  int corner_hi;
  double lo, hi;  // along-coordinate range
};

bool cell_side_edge(const Box& dom, const Box& box, int side, double tol,
                    EdgeOnSide* e) {
  switch (side) {
    case 0:
      if (std::abs(box.x0 - dom.x0) > tol) return false;
      *e = {0, 2, box.y0, box.y1};
      return true;
    case 1:
      if (std::abs(box.x1 - dom.x1) > tol) return false;
      *e = {1, 3, box.y0, box.y1};
      return true;
    case 2:
      if (std::abs(box.y0 - dom.y0) > tol) return false;
      *e = {0, 1, box.x0, box.x1};
      return true;
    default:
      if (std::abs(box.y1 - dom.y1) > tol) return false;
      *e = {2, 3, box.x0, box.x1};
      return true;
  }
}

// Neumann load: f(v) -= int_seg h v over every (possibly clipped) boundary
// edge piece. `weight` scales per-cell contributions (used by the
// side-restricted interface accounting); pass nullptr for 1.
template <class WeightFn>
void assemble_neumann(const FESpace& fs, const std::vector<BCSegment>& bcs,
                      WeightFn&& weight, std::vector<DD>& f) {
  const MeshView& mv = *fs.mesh;
  const double tol = geom_tol(mv.domain);
  const QuadRule g = gauss2();
  for (std::size_t e = 0; e < mv.cells.size(); ++e) {
    const double w_cell = weight(e);
    if (w_cell == 0.0) continue;
    const Box& box = mv.boxes[e];
    for (const auto& bc : bcs) {
      if (bc.dirichlet) continue;
      EdgeOnSide edge;
      if (!cell_side_edge(mv.domain, box, bc.side, tol, &edge)) continue;
      const double lo = std::max(edge.lo, bc.lo), hi = std::min(edge.hi, bc.hi);
      if (hi - lo <= tol) continue;
      const double len_edge = edge.hi - edge.lo;
      const int n_lo = mv.cells[e][edge.corner_lo];
      const int n_hi = mv.cells[e][edge.corner_hi];
      for (int q = 0; q < g.n; ++q) {
        const double s = lo + g.x[q] * (hi - lo);
        const double wq = g.w[q] * (hi - lo) * w_cell;
        const double t = (s - edge.lo) / len_edge;  // hat weights on the edge
        const double c_lo = -bc.value * wq * (1.0 - t);
        const double c_hi = -bc.value * wq * t;
        for (const auto& term : fs.expansion[n_lo]) add_prod(f[term.dof], c_lo, term.w);
        for (const auto& term : fs.expansion[n_hi]) add_prod(f[term.dof], c_hi, term.w);
      }
    }
  }
}

// Liang-Barsky: clip segment a + t (b - a), t in [0,1], to the closed box.
bool clip_segment_box(Point a, Point b, const Box& bx, double* t0_out,
                      double* t1_out) {
  const double d[2] = {b.x - a.x, b.y - a.y};
  const double lo[2] = {bx.x0, bx.y0}, hi[2] = {bx.x1, bx.y1};
  const double s[2] = {a.x, a.y};
  double t0 = 0.0, t1 = 1.0;
  for (int ax = 0; ax < 2; ++ax) {
    if (d[ax] == 0.0) {
      if (s[ax] < lo[ax] || s[ax] > hi[ax]) return false;
      continue;
    }
    double ta = (lo[ax] - s[ax]) / d[ax];
    double tb = (hi[ax] - s[ax]) / d[ax];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  if (t0_out) *t0_out = t0;
  if (t1_out) *t1_out = t1;
  return true;
}

// Fraction of the box area left of the oriented line a->b (1 when fully
// left, 0 when fully right).
double left_fraction(const Box& box, Point a, Point b) {
  // left of a->b means cross(b-a, p-a) > 0, i.e. dy*x - dx*y <= dy*ax - dx*ay.
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double area = box.area();
  if (area <= 0.0) return 0.0;
  return box_half_plane_area(box, dy, -dx, dy * a.x - dx * a.y) / area;
}

// Per-cell side weight relative to the oriented segment a->b: 1 on the
// left, 0 on the right, area fraction when the line cuts the interior.
double cell_side1_weight(const Box& box, Point a, Point b, double tol) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const Point corners[4] = {{box.x0, box.y0}, {box.x1, box.y0},
                            {box.x0, box.y1}, {box.x1, box.y1}};
  int n_left = 0, n_right = 0;
  for (const Point& c : corners) {
    const double cr = dx * (c.y - a.y) - dy * (c.x - a.x);
    if (cr > tol) n_left++;
    else if (cr < -tol) n_right++;
  }
  if (n_right == 0 && n_left == 0) return 0.0;  // degenerate sliver
  if (n_right == 0) return 1.0;
  if (n_left == 0) return 0.0;
  // the infinite line cuts the box; apportion only if the segment reaches it
  double t0, t1;
  if (!clip_segment_box(a, b, box, &t0, &t1) || t1 - t0 <= 0.0) {
    // box straddles the line's extension beyond the segment: classify by center
    const Point c = box.center();
    return dx * (c.y - a.y) - dy * (c.x - a.x) > 0.0 ? 1.0 : 0.0;
  }
  return left_fraction(box, a, b);
}

// Side-restricted residual rho^(1)_i = sum over weighted cells of
// (f_E - A_E p)_i, recomputed deterministically from the same kernels that
// assembled the operator.
template <class WeightFn>
std::vector<DD> side_residual(const FlowSolution& sol, const MaterialField& mat,
                              WeightFn&& weight) {
  const FESpace& fs = *sol.fs;
  const int n = fs.n_r;
  std::vector<DD> rho1(n);
  assemble_neumann(fs, sol.bcs, weight, rho1);  // f part (already signed)
  double p_loc[8];
  for (std::size_t e = 0; e < fs.mesh->cells.size(); ++e) {
    const double w = weight(e);
    if (w == 0.0) continue;
    const ElemBlock b = flow_cell_block(fs, mat, e, sol.stabilized);
    for (int q = 0; q < b.n; ++q) p_loc[q] = sol.p[std::size_t(b.dofs[q])];
    for (int p = 0; p < b.n; ++p) {
      DD acc;
      for (int q = 0; q < b.n; ++q) acc += b.a[p][q] * p_loc[q];
      if (w == 1.0)
        rho1[b.dofs[p]] -= acc;
      else
        rho1[b.dofs[p]] -= acc * w;
    }
  }
  return rho1;
}

// Dofs whose basis support touches any of the given segments.
std::vector<char> support_rows(const FESpace& fs,
                               const std::vector<std::pair<Point, Point>>& segs) {
  std::vector<char> in(fs.n_r, 0);
  for (std::size_t e = 0; e < fs.mesh->cells.size(); ++e) {
    const Box& box = fs.mesh->boxes[e];
    bool touches = false;
    for (const auto& s : segs)
      if (clip_segment_box(s.first, s.second, box, nullptr, nullptr)) {
        touches = true;
        break;
      }
    if (!touches) continue;
    const auto cc = fs.cell_coupling(e);
    for (int k = 0; k < cc.n_dofs; ++k) in[cc.dofs[k]] = 1;
  }
  return in;
}

InterfaceFlux reduce_interface(const FlowSolution& sol, const std::vector<DD>& rho1,
                               const std::vector<char>& rows) {
  InterfaceFlux out;
  DD q1, qfull;
  int n_rows = 0;
  for (int i = 0; i < sol.fs->n_r; ++i) {
    if (!rows[i] || sol.is_dirichlet[i]) continue;
    q1 += rho1[i];
    qfull += sol.rho[i];
    ++n_rows;
  }
  out.q_side1 = q1.value();
  out.q_side2 = (qfull - q1).value();
  out.imbalance = qfull.value();
  out.n_rows = n_rows;
  return out;
}

}  // namespace

DD FlowSolution::dirichlet_flux() const {
  DD q;
  for (int i = 0; i < fs->n_r; ++i)
    if (is_dirichlet[i]) q += rho[i];
  return q;
}

double FlowSolution::balance_error() const {
  return std::abs((dirichlet_flux() + neumann_total).value());
}

FlowSolution solve_flow(const FlowProblem& prob) {
  const FESpace& fs = *prob.fs;
  const MeshView& mv = *fs.mesh;
  const int n = fs.n_r;
  const double tol = geom_tol(mv.domain);

  FlowSolution sol;
  sol.fs = prob.fs;
  sol.bcs = prob.bcs;
  sol.stabilized = prob.stabilize;

  // Dirichlet dofs from node coordinates (hanging nodes never lie on the
  // boundary of an axis-aligned quadtree mesh).
  sol.is_dirichlet.assign(n, 0);
  sol.g.assign(n, 0.0);
  for (int d = 0; d < n; ++d) {
    const Point p = mv.nodes[std::size_t(fs.dof_node[d])];
    for (const auto& bc : prob.bcs) {
      if (!bc.dirichlet) continue;
      if (!on_side(mv.domain, bc.side, p, tol)) continue;
      const double s = along_coord(bc.side, p);
      if (s >= bc.lo - tol && s <= bc.hi + tol) {
        sol.is_dirichlet[d] = 1;
        sol.g[d] = bc.value;
      }
    }
  }
  int n_dir = 0;
  for (int d = 0; d < n; ++d) n_dir += sol.is_dirichlet[d];
  if (n_dir == 0)
    throw SolverError("flow problem has no Dirichlet boundary (singular)");

  // Raw operator and load.
  std::vector<Triplet> trips;
  assemble_flow_operator(fs, *prob.mat, prob.stabilize, trips);
  sol.a_raw = SparseDD::from_triplets(n, std::move(trips));
  sol.f.assign(n, DD{});
  assemble_neumann(fs, prob.bcs, [](std::size_t) { return 1.0; }, sol.f);
  for (const auto& bc : prob.bcs) {
    if (bc.dirichlet) continue;
    const double side_lo = bc.side <= 1 ? mv.domain.y0 : mv.domain.x0;
    const double side_hi = bc.side <= 1 ? mv.domain.y1 : mv.domain.x1;
    const double len = std::min(bc.hi, side_hi) - std::max(bc.lo, side_lo);
    if (len > 0.0) add_prod(sol.neumann_total, bc.value, len);
  }

  // Reduced free-free system.
  std::vector<int> fidx(n, -1);
  int n_free = 0;
  for (int d = 0; d < n; ++d)
    if (!sol.is_dirichlet[d]) fidx[d] = n_free++;
  std::vector<Triplet> red;
  red.reserve(sol.a_raw.col.size());
  std::vector<DD> b_red(n_free);
  for (int r = 0; r < n; ++r) {
    if (fidx[r] < 0) continue;
    DD acc = sol.f[r];
    for (int k = sol.a_raw.rowptr[r]; k < sol.a_raw.rowptr[r + 1]; ++k) {
      const int c = sol.a_raw.col[k];
      if (fidx[c] >= 0)
        red.push_back({fidx[r], fidx[c], sol.a_raw.val[k]});
      else
        acc -= sol.a_raw.val[k] * sol.g[c];
    }
    b_red[fidx[r]] = acc;
  }
  const SparseDD a_red = SparseDD::from_triplets(n_free, std::move(red));

  DirectSolver solver;
  if (!solver.factorize(a_red))
    throw SolverError("sparse LU factorization of the flow system failed");
  const std::vector<double> x = solver.solve(a_red, b_red, prob.ir_passes, &sol.stats);

  sol.p.assign(n, 0.0);
  for (int d = 0; d < n; ++d)
    sol.p[d] = sol.is_dirichlet[d] ? sol.g[d] : x[std::size_t(fidx[d])];

  // Residual functional against the raw operator.
  const std::vector<DD> ap = sol.a_raw.multiply(sol.p);
  sol.rho.resize(n);
  for (int d = 0; d < n; ++d) sol.rho[d] = sol.f[d] - ap[d];

  sol.mmatrix = check_m_matrix(a_red, 1e-14);
  return sol;
}

InterfaceFlux interface_flux_segment(const FlowSolution& sol, const MaterialField& mat,
                                     Point a, Point b) {
  const FESpace& fs = *sol.fs;
  const double tol = geom_tol(fs.mesh->domain);
  const auto weight = [&](std::size_t e) {
    return cell_side1_weight(fs.mesh->boxes[e], a, b, tol);
  };
  const std::vector<DD> rho1 = side_residual(sol, mat, weight);
  const std::vector<char> rows = support_rows(fs, {{a, b}});
  return reduce_interface(sol, rho1, rows);
}

InterfaceFlux interface_flux_skeleton(const FlowSolution& sol, const MaterialField& mat) {
  const FESpace& fs = *sol.fs;
  const auto weight = [&](std::size_t e) {
    return mat.classify(fs.mesh->boxes[e].center()) < 0 ? 1.0 : 0.0;
  };
  const std::vector<DD> rho1 = side_residual(sol, mat, weight);
  std::vector<std::pair<Point, Point>> segs;
  for (const auto& fr : mat.fractures) {
    const auto c = fr.corners();
    for (int k = 0; k < 4; ++k) segs.push_back({c[std::size_t(k)], c[std::size_t((k + 1) % 4)]});
  }
  const std::vector<char> rows = support_rows(fs, segs);
  return reduce_interface(sol, rho1, rows);
}

FluxDensity dirichlet_flux_density(const FlowSolution& sol) {
  const FESpace& fs = *sol.fs;
  const MeshView& mv = *fs.mesh;
  const double tol = geom_tol(mv.domain);

  // Boundary mass over Dirichlet edges; involved dofs get local indices.
  std::unordered_map<int, int> local;
  std::vector<int> dofs;
  auto idx = [&](int d) {
    auto [it, inserted] = local.try_emplace(d, int(dofs.size()));
    if (inserted) dofs.push_back(d);
    return it->second;
  };
  std::vector<Triplet> trips;
  for (std::size_t e = 0; e < mv.cells.size(); ++e) {
    const Box& box = mv.boxes[e];
    for (const auto& bc : sol.bcs) {
      if (!bc.dirichlet) continue;
      EdgeOnSide edge;
      if (!cell_side_edge(mv.domain, box, bc.side, tol, &edge)) continue;
      const double mid = 0.5 * (edge.lo + edge.hi);
      if (mid < bc.lo - tol || mid > bc.hi + tol) continue;
      const int n_lo = mv.cells[e][edge.corner_lo];
      const int n_hi = mv.cells[e][edge.corner_hi];
      const int d_lo = fs.node_dof[n_lo], d_hi = fs.node_dof[n_hi];
      if (d_lo < 0 || d_hi < 0) continue;  // cannot happen on the boundary
      if (!sol.is_dirichlet[d_lo] || !sol.is_dirichlet[d_hi]) continue;
      const double len = edge.hi - edge.lo;
      const int i = idx(d_lo), j = idx(d_hi);
      trips.push_back({i, i, DD(len / 3.0)});
      trips.push_back({j, j, DD(len / 3.0)});
      trips.push_back({i, j, DD(len / 6.0)});
      trips.push_back({j, i, DD(len / 6.0)});
    }
  }
  FluxDensity out;
  if (dofs.empty()) return out;
  const int m = int(dofs.size());
  const SparseDD bmat = SparseDD::from_triplets(m, std::move(trips));
  std::vector<DD> rhs(m);
  for (int i = 0; i < m; ++i) rhs[i] = sol.rho[dofs[std::size_t(i)]];
  DirectSolver solver;
  if (!solver.factorize(bmat))
    throw SolverError("boundary mass factorization failed");
  out.q = solver.solve(bmat, rhs, 2);
  out.dofs = dofs;
  out.where.reserve(dofs.size());
  for (int d : dofs) out.where.push_back(mv.nodes[std::size_t(fs.dof_node[d])]);
  return out;
}

FluxDensity interface_flux_density(const FlowSolution& sol, const MaterialField& mat,
                                   Point a, Point b) {
  const FESpace& fs = *sol.fs;
  const MeshView& mv = *fs.mesh;
  const double tol = geom_tol(mv.domain);
  FluxDensity out;

  const bool vertical = std::abs(a.x - b.x) <= tol;
  const bool horizontal = std::abs(a.y - b.y) <= tol;
  if (!vertical && !horizontal) return out;  // density needs mesh-aligned edges

  const double c = vertical ? a.x : a.y;
  const double r0 = vertical ? std::min(a.y, b.y) : std::min(a.x, b.x);
  const double r1 = vertical ? std::max(a.y, b.y) : std::max(a.x, b.x);
  const double seg_len = r1 - r0;

  const auto weight = [&](std::size_t e) {
    return cell_side1_weight(mv.boxes[e], a, b, tol);
  };
  const std::vector<DD> rho1 = side_residual(sol, mat, weight);

  // Edge mass over side-1 cell edges lying on the segment, scattered
  // through the hanging-node expansions.
  std::unordered_map<int, int> local;
  std::vector<int> dofs;
  auto idx = [&](int d) {
    auto [it, inserted] = local.try_emplace(d, int(dofs.size()));
    if (inserted) dofs.push_back(d);
    return it->second;
  };
  std::vector<Triplet> trips;
  std::vector<DD> lumped;  // int of each hat along the segment
  auto add_edge = [&](int node_lo, int node_hi, double len) {
    const double m_d = len / 3.0, m_o = len / 6.0;
    const auto& ex_lo = fs.expansion[node_lo];
    const auto& ex_hi = fs.expansion[node_hi];
    auto scatter = [&](const std::vector<FESpace::Term>& ea,
                       const std::vector<FESpace::Term>& eb, double v) {
      for (const auto& ta : ea)
        for (const auto& tb : eb) {
          const int i = idx(ta.dof), j = idx(tb.dof);
          if (std::max(i, j) >= int(lumped.size())) lumped.resize(std::size_t(std::max(i, j)) + 1);
          trips.push_back({i, j, DD(v * ta.w * tb.w)});
          lumped[std::size_t(i)] += v * ta.w * tb.w;
        }
    };
    scatter(ex_lo, ex_lo, m_d);
    scatter(ex_hi, ex_hi, m_d);
    scatter(ex_lo, ex_hi, m_o);
    scatter(ex_hi, ex_lo, m_o);
  };

  for (std::size_t e = 0; e < mv.cells.size(); ++e) {
    if (weight(e) != 1.0) continue;  // side-1 cells with an edge on the line
    const Box& box = mv.boxes[e];
    int nl = -1, nh = -1;
    double elo = 0, ehi = 0;
    if (vertical) {
      if (std::abs(box.x0 - c) <= tol) {
        nl = mv.cells[e][0]; nh = mv.cells[e][2];
      } else if (std::abs(box.x1 - c) <= tol) {
        nl = mv.cells[e][1]; nh = mv.cells[e][3];
      } else {
        continue;
      }
      elo = box.y0; ehi = box.y1;
    } else {
      if (std::abs(box.y0 - c) <= tol) {
        nl = mv.cells[e][0]; nh = mv.cells[e][1];
      } else if (std::abs(box.y1 - c) <= tol) {
        nl = mv.cells[e][2]; nh = mv.cells[e][3];
      } else {
        continue;
      }
      elo = box.x0; ehi = box.x1;
    }
    if (ehi <= r0 + tol || elo >= r1 - tol) continue;  // outside the segment
    add_edge(nl, nh, ehi - elo);
  }
  if (dofs.empty()) return out;

  // Keep free rows with meaningful trace on the segment.
  const int m = int(dofs.size());
  lumped.resize(std::size_t(m));
  std::vector<int> keep;
  for (int i = 0; i < m; ++i) {
    const int d = dofs[std::size_t(i)];
    if (sol.is_dirichlet[d]) continue;
    if (lumped[std::size_t(i)].value() < 1e-12 * seg_len) continue;
    keep.push_back(i);
  }
  if (keep.empty()) return out;
  std::vector<int> remap(std::size_t(m), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) remap[std::size_t(keep[k])] = int(k);
  std::vector<Triplet> kept;
  kept.reserve(trips.size());
  for (const auto& t : trips) {
    const int i = remap[std::size_t(t.r)], j = remap[std::size_t(t.c)];
    if (i >= 0 && j >= 0) kept.push_back({i, j, t.v});
  }
  const int mk = int(keep.size());
  const SparseDD bmat = SparseDD::from_triplets(mk, std::move(kept));
  std::vector<DD> rhs(mk);
  for (int k = 0; k < mk; ++k) rhs[std::size_t(k)] = rho1[dofs[std::size_t(keep[std::size_t(k)])]];
  DirectSolver solver;
  if (!solver.factorize(bmat))
    throw SolverError("interface mass factorization failed");
  out.q = solver.solve(bmat, rhs, 2);
  out.dofs.reserve(keep.size());
  out.where.reserve(keep.size());
  for (int k : keep) {
    const int d = dofs[std::size_t(k)];
    out.dofs.push_back(d);
    out.where.push_back(mv.nodes[std::size_t(fs.dof_node[d])]);
  }
  // sort along the segment
  std::vector<std::size_t> order(out.dofs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return (vertical ? out.where[i].y : out.where[i].x) <
           (vertical ? out.where[j].y : out.where[j].x);
  });
  FluxDensity sorted;
  for (std::size_t i : order) {
    sorted.dofs.push_back(out.dofs[i]);
    sorted.where.push_back(out.where[i]);
    sorted.q.push_back(out.q[i]);
  }
  return sorted;
}

}  // namespace fracfem
