#include "fracfem/transport.hpp"

#include <algorithm>
#include <cmath>

namespace fracfem {

namespace {

double geom_tol(const Box& dom) {
  return 1e-12 * std::max({1.0, dom.width(), dom.height()});
}

}  // namespace

TransportResult solve_transport(const TransportProblem& prob) {
  const FESpace& fs = *prob.fs;
  const MeshView& mv = *fs.mesh;
  const int n = fs.n_r;
  const double tol = geom_tol(mv.domain);
  if (prob.dt <= 0.0 || prob.t_final <= 0.0)
    throw SolverError("transport needs positive dt and t_final");

  // Dirichlet dofs for the concentration.
  std::vector<char> dir(n, 0);
  std::vector<double> g(n, 0.0);
  for (int d = 0; d < n; ++d) {
    const Point p = mv.nodes[std::size_t(fs.dof_node[d])];
    for (const auto& bc : prob.bcs) {
      if (!bc.dirichlet) continue;
      bool on = false;
      switch (bc.side) {
        case 0: on = std::abs(p.x - mv.domain.x0) <= tol; break;
        case 1: on = std::abs(p.x - mv.domain.x1) <= tol; break;
        case 2: on = std::abs(p.y - mv.domain.y0) <= tol; break;
        default: on = std::abs(p.y - mv.domain.y1) <= tol; break;
      }
      if (!on) continue;
      const double s = bc.side <= 1 ? p.y : p.x;
      if (s >= bc.lo - tol && s <= bc.hi + tol) {
        dir[d] = 1;
        g[d] = bc.value;
      }
    }
  }

  // Operators: consistent mass; advection in divergence form, whose column
  // sums cancel exactly so the assembled operator is globally conservative;
  // and a lumped outflow closure on the diagonal.  The advective row sum at
  // a dof equals the net volumetric rate the computed flow extracts there:
  // it vanishes at interior dofs by the discrete flow equations and reduces
  // to the consistent nodal boundary flux at pressure-Dirichlet dofs (plus
  // whatever local imbalance flow stabilization introduced).  Fluid leaving
  // through a dof must carry the local concentration with it, so a negative
  // row sum is compensated on the diagonal by its exact negation; positive
  // row sums (net inflow, which dilutes) are left alone.  This restores the
  // non-negative row sums the maximum principle needs while keeping the
  // outflow accounting aligned with the fluxes the flow solution reports.
  std::vector<Triplet> m_trips;
  assemble_mass(fs, *prob.mat, m_trips);
  const SparseDD m_mat = SparseDD::from_triplets(n, std::move(m_trips));

  std::vector<Triplet> a_trips;
  a_trips.reserve(16 * mv.cells.size() + std::size_t(n));
  for (std::size_t e = 0; e < mv.cells.size(); ++e) {
    Mat4DD local;
    local_advection(fs, e, *prob.mat, prob.flow->p, local);
    scatter_block(restrict_block(fs.cell_coupling(e), local), a_trips);
  }
  {
    const SparseDD a_vol = SparseDD::from_triplets(n, a_trips);
    const std::vector<DD> net_out = a_vol.row_sums();
    for (int i = 0; i < n; ++i)
      if (net_out[std::size_t(i)].value() < 0.0)
        a_trips.push_back({i, i, -net_out[std::size_t(i)]});
  }
  const SparseDD a_mat = SparseDD::from_triplets(n, std::move(a_trips));
  const SparseDD s_mat = SparseDD::from_triplets(n, global_stabilization(a_mat));

  const std::vector<DD> ml_dd = m_mat.row_sums();
  std::vector<double> ml(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ml[std::size_t(i)] = ml_dd[std::size_t(i)].value();
    if (ml[std::size_t(i)] <= 0.0) throw SolverError("non-positive lumped mass entry");
  }

  const bool high_order = prob.limiter == LimiterMode::unity;
  const double dt = prob.dt;

  // Step operator with identity Dirichlet rows.
  std::vector<Triplet> b_trips;
  b_trips.reserve(a_mat.col.size() + s_mat.col.size() + std::size_t(n));
  auto push_scaled = [&](const SparseDD& src) {
    for (int r = 0; r < src.n; ++r) {
      if (dir[r]) continue;
      for (int k = src.rowptr[r]; k < src.rowptr[r + 1]; ++k)
        b_trips.push_back({r, src.col[k], src.val[k] * dt});
    }
  };
  push_scaled(a_mat);
  if (!high_order) push_scaled(s_mat);
  for (int i = 0; i < n; ++i) {
    if (dir[i]) {
      b_trips.push_back({i, i, DD(1.0)});
    } else if (high_order) {
      for (int k = m_mat.rowptr[i]; k < m_mat.rowptr[i + 1]; ++k)
        b_trips.push_back({i, m_mat.col[k], m_mat.val[k]});
    } else {
      b_trips.push_back({i, i, DD(ml[std::size_t(i)])});
    }
  }
  const SparseDD b_mat = SparseDD::from_triplets(n, std::move(b_trips));

  DirectSolver solver;
  if (!solver.factorize(b_mat))
    throw SolverError("transport step operator factorization failed");

  TransportResult res;
  res.step_matrix = check_m_matrix(b_mat, 1e-14);

  std::vector<double> c(std::size_t(n), prob.initial_value);
  for (int i = 0; i < n; ++i)
    if (dir[i]) c[std::size_t(i)] = g[std::size_t(i)];

  auto record = [&](double t) {
    TransportStepRecord r;
    r.t = t;
    r.c_min = *std::min_element(c.begin(), c.end());
    r.c_max = *std::max_element(c.begin(), c.end());
    DD mass;
    for (int i = 0; i < n; ++i) add_prod(mass, ml[std::size_t(i)], c[std::size_t(i)]);
    r.mass = mass.value();
    res.history.push_back(r);
    res.global_min = std::min(res.global_min, r.c_min);
    res.global_max = std::max(res.global_max, r.c_max);
  };
  res.global_min = *std::min_element(c.begin(), c.end());
  res.global_max = *std::max_element(c.begin(), c.end());
  record(0.0);

  const double ratio = prob.t_final / dt;
  const long n_steps = std::llround(ratio);
  if (n_steps < 1 || std::abs(ratio - double(n_steps)) > 1e-6 * std::max(1.0, ratio))
    throw SolverError("t_final must be an integer multiple of dt");
  res.n_steps = int(n_steps);
  std::vector<double> snap_left = prob.snapshot_times;
  std::sort(snap_left.begin(), snap_left.end());
  while (!snap_left.empty() && snap_left.front() <= 0.0) {
    res.snapshots.emplace_back(0.0, c);
    snap_left.erase(snap_left.begin());
  }

  // Pattern-aligned caches for the antidiffusive flux loops.
  std::vector<double> mij_cache(m_mat.val.size()), sij_cache(m_mat.val.size());
  if (prob.limiter == LimiterMode::zalesak) {
    for (int i = 0; i < n; ++i)
      for (int k = m_mat.rowptr[i]; k < m_mat.rowptr[i + 1]; ++k) {
        mij_cache[std::size_t(k)] = m_mat.val[std::size_t(k)].value();
        sij_cache[std::size_t(k)] = s_mat.at(i, m_mat.col[std::size_t(k)]).value();
      }
  }

  std::vector<DD> rhs(static_cast<std::size_t>(n));
  std::vector<double> c_low(static_cast<std::size_t>(n)), cdot(static_cast<std::size_t>(n)), c_new(static_cast<std::size_t>(n));
  std::vector<double> cmax(static_cast<std::size_t>(n)), cmin(static_cast<std::size_t>(n)), pp(static_cast<std::size_t>(n)),
      pm(static_cast<std::size_t>(n)), rp(static_cast<std::size_t>(n)), rm(static_cast<std::size_t>(n));

  for (long step = 1; step <= n_steps; ++step) {
    const double t_now = double(step) * dt;

    if (high_order) {
      const std::vector<DD> mc = m_mat.multiply(c);
      for (int i = 0; i < n; ++i) rhs[std::size_t(i)] = dir[i] ? DD(g[std::size_t(i)]) : mc[std::size_t(i)];
      c_new = solver.solve(b_mat, rhs, prob.ir_passes);
      for (int i = 0; i < n; ++i)
        if (dir[i]) c_new[std::size_t(i)] = g[std::size_t(i)];
      c = c_new;
      record(t_now);
    } else {
      for (int i = 0; i < n; ++i)
        rhs[std::size_t(i)] =
            dir[i] ? DD(g[std::size_t(i)]) : dd_prod(ml[std::size_t(i)], c[std::size_t(i)]);
      c_low = solver.solve(b_mat, rhs, prob.ir_passes);
      for (int i = 0; i < n; ++i)
        if (dir[i]) c_low[std::size_t(i)] = g[std::size_t(i)];

      if (prob.limiter == LimiterMode::none) {
        c = c_low;
        record(t_now);
        continue;
      }

      for (int i = 0; i < n; ++i)
        cdot[std::size_t(i)] = (c_low[std::size_t(i)] - c[std::size_t(i)]) / dt;

      // local bounds over the mass-matrix stencil
      for (int i = 0; i < n; ++i) {
        double hi = std::max(c_low[std::size_t(i)], c[std::size_t(i)]);
        double lo = std::min(c_low[std::size_t(i)], c[std::size_t(i)]);
        for (int k = m_mat.rowptr[i]; k < m_mat.rowptr[i + 1]; ++k) {
          const int j = m_mat.col[k];
          hi = std::max({hi, c_low[std::size_t(j)], c[std::size_t(j)]});
          lo = std::min({lo, c_low[std::size_t(j)], c[std::size_t(j)]});
        }
        cmax[std::size_t(i)] = hi;
        cmin[std::size_t(i)] = lo;
      }

      // Zalesak sums over the antidiffusive fluxes
      std::fill(pp.begin(), pp.end(), 0.0);
      std::fill(pm.begin(), pm.end(), 0.0);
      for (int i = 0; i < n; ++i) {
        if (dir[i]) continue;
        for (int k = m_mat.rowptr[i]; k < m_mat.rowptr[i + 1]; ++k) {
          const int j = m_mat.col[k];
          if (j == i || dir[j]) continue;
          const double fij =
              mij_cache[std::size_t(k)] * (cdot[std::size_t(i)] - cdot[std::size_t(j)]) -
              sij_cache[std::size_t(k)] * (c_low[std::size_t(i)] - c_low[std::size_t(j)]);
          if (fij > 0.0)
            pp[std::size_t(i)] += fij;
          else
            pm[std::size_t(i)] += fij;
        }
      }
      for (int i = 0; i < n; ++i) {
        const double qp = ml[std::size_t(i)] * (cmax[std::size_t(i)] - c_low[std::size_t(i)]) / dt;
        const double qm = ml[std::size_t(i)] * (cmin[std::size_t(i)] - c_low[std::size_t(i)]) / dt;
        rp[std::size_t(i)] = pp[std::size_t(i)] > 0.0 ? std::min(1.0, qp / pp[std::size_t(i)]) : 1.0;
        rm[std::size_t(i)] = pm[std::size_t(i)] < 0.0 ? std::min(1.0, qm / pm[std::size_t(i)]) : 1.0;
      }

      for (int i = 0; i < n; ++i) {
        double corr = 0.0;
        if (!dir[i]) {
          for (int k = m_mat.rowptr[i]; k < m_mat.rowptr[i + 1]; ++k) {
            const int j = m_mat.col[k];
            if (j == i || dir[j]) continue;
            const double fij =
                mij_cache[std::size_t(k)] * (cdot[std::size_t(i)] - cdot[std::size_t(j)]) -
                sij_cache[std::size_t(k)] * (c_low[std::size_t(i)] - c_low[std::size_t(j)]);
            const double alpha = fij > 0.0
                                     ? std::min(rp[std::size_t(i)], rm[std::size_t(j)])
                                     : std::min(rm[std::size_t(i)], rp[std::size_t(j)]);
            corr += alpha * fij;
          }
        }
        // The limited correction stays inside [cmin, cmax] in exact
        // arithmetic; clamp away the last few ulps of rounding noise so the
        // bounds hold literally.
        c_new[std::size_t(i)] =
            std::clamp(c_low[std::size_t(i)] + dt * corr / ml[std::size_t(i)],
                       cmin[std::size_t(i)], cmax[std::size_t(i)]);
      }
      for (int i = 0; i < n; ++i)
        if (dir[i]) c_new[std::size_t(i)] = g[std::size_t(i)];
      c = c_new;
      record(t_now);
    }

    while (!snap_left.empty() && snap_left.front() <= t_now + 1e-9 * dt) {
      res.snapshots.emplace_back(t_now, c);
      snap_left.erase(snap_left.begin());
    }
  }

  res.c = c;
  return res;
}

}  // namespace fracfem
