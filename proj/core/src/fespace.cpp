#include "fracfem/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace fracfem {

namespace {

// Resolve the expansion of node `n` in regular dofs, memoized. `state`
// guards against constraint cycles (0 = untouched, 1 = in progress,
// 2 = done).
void resolve(int n, const std::vector<int>& node_dof,
             const std::unordered_map<int, std::pair<int, int>>& masters,
             std::vector<std::vector<FESpace::Term>>& expansion,
             std::vector<char>& state) {
  if (state[n] == 2) return;
  if (state[n] == 1)
    throw std::runtime_error("hanging-node constraints form a cycle");
  state[n] = 1;
  if (node_dof[n] >= 0) {
    expansion[n] = {{node_dof[n], 1.0}};
    state[n] = 2;
    return;
  }
  auto it = masters.find(n);
  if (it == masters.end())
    throw std::runtime_error("hanging node without masters in mesh view");
  std::vector<FESpace::Term> merged;
  for (int m : {it->second.first, it->second.second}) {
    resolve(m, node_dof, masters, expansion, state);
    for (const auto& t : expansion[m]) {
      auto pos = std::find_if(merged.begin(), merged.end(),
                              [&](const FESpace::Term& e) { return e.dof == t.dof; });
      if (pos == merged.end())
        merged.push_back({t.dof, 0.5 * t.w});
      else
        pos->w += 0.5 * t.w;
    }
  }
  std::sort(merged.begin(), merged.end(),
            [](const FESpace::Term& a, const FESpace::Term& b) { return a.dof < b.dof; });
  expansion[n] = std::move(merged);
  state[n] = 2;
}

}  // namespace

FESpace build_fespace(const MeshView& mv) {
  FESpace fs;
  fs.mesh = &mv;
  fs.n_h = static_cast<int>(mv.nodes.size());

  std::vector<char> is_hanging(fs.n_h, 0);
  std::unordered_map<int, std::pair<int, int>> masters;
  masters.reserve(mv.hangings.size());
  for (const auto& h : mv.hangings) {
    is_hanging[h.node] = 1;
    masters[h.node] = {h.ma, h.mb};
  }

  fs.node_dof.assign(fs.n_h, -1);
  fs.dof_node.clear();
  for (int n = 0; n < fs.n_h; ++n) {
    if (!is_hanging[n]) {
      fs.node_dof[n] = static_cast<int>(fs.dof_node.size());
      fs.dof_node.push_back(n);
    }
  }
  fs.n_r = static_cast<int>(fs.dof_node.size());

  fs.expansion.resize(fs.n_h);
  std::vector<char> state(fs.n_h, 0);
  for (int n = 0; n < fs.n_h; ++n) resolve(n, fs.node_dof, masters, fs.expansion, state);
  return fs;
}

std::vector<double> FESpace::prolongate(const std::vector<double>& c_r) const {
  std::vector<double> c_h(n_h, 0.0);
  for (int n = 0; n < n_h; ++n) {
    double v = 0.0;
    for (const auto& t : expansion[n]) v += t.w * c_r[t.dof];
    c_h[n] = v;
  }
  return c_h;
}

std::vector<double> FESpace::restrict_functional(const std::vector<double>& w_h) const {
  std::vector<double> w_r(n_r, 0.0);
  for (int n = 0; n < n_h; ++n)
    for (const auto& t : expansion[n]) w_r[t.dof] += t.w * w_h[n];
  return w_r;
}

FESpace::CellCoupling FESpace::cell_coupling(std::size_t cell) const {
  const auto& cn = mesh->cells[cell];
  CellCoupling cc;
  for (int c = 0; c < 4; ++c) {
    for (const auto& t : expansion[cn[c]]) {
      int slot = -1;
      for (int k = 0; k < cc.n_dofs; ++k)
        if (cc.dofs[k] == t.dof) {
          slot = k;
          break;
        }
      if (slot < 0) {
        if (cc.n_dofs >= 8)
          throw std::runtime_error("cell couples more than 8 dofs (constraint cascade)");
        slot = cc.n_dofs++;
        cc.dofs[slot] = t.dof;
        cc.r[slot].fill(0.0);
      }
      cc.r[slot][c] += t.w;
    }
  }
  // Sort rows by dof so elemental matrices have a canonical layout.
  std::array<int, 8> order;
  for (int k = 0; k < cc.n_dofs; ++k) order[k] = k;
  std::sort(order.begin(), order.begin() + cc.n_dofs,
            [&](int a, int b) { return cc.dofs[a] < cc.dofs[b]; });
  CellCoupling out;
  out.n_dofs = cc.n_dofs;
  for (int k = 0; k < cc.n_dofs; ++k) {
    out.dofs[k] = cc.dofs[order[k]];
    out.r[k] = cc.r[order[k]];
  }
  return out;
}

double FESpace::eval(std::size_t cell, Point p, const std::vector<double>& c_r) const {
  const auto& b = mesh->boxes[cell];
  const auto& cn = mesh->cells[cell];
  const double s = (p.x - b.x0) / b.width();
  const double t = (p.y - b.y0) / b.height();
  const double sh[4] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
  double v = 0.0;
  for (int c = 0; c < 4; ++c) {
    double nodal = 0.0;
    for (const auto& e : expansion[cn[c]]) nodal += e.w * c_r[e.dof];
    v += sh[c] * nodal;
  }
  return v;
}

Point FESpace::eval_grad(std::size_t cell, Point p, const std::vector<double>& c_r) const {
  const auto& b = mesh->boxes[cell];
  const auto& cn = mesh->cells[cell];
  const double hx = b.width(), hy = b.height();
  const double s = (p.x - b.x0) / hx;
  const double t = (p.y - b.y0) / hy;
  const double ds[4] = {-(1 - t), (1 - t), -t, t};
  const double dt[4] = {-(1 - s), -s, (1 - s), s};
  double gx = 0.0, gy = 0.0;
  for (int c = 0; c < 4; ++c) {
    double nodal = 0.0;
    for (const auto& e : expansion[cn[c]]) nodal += e.w * c_r[e.dof];
    gx += ds[c] / hx * nodal;
    gy += dt[c] / hy * nodal;
  }
  return {gx, gy};
}

}  // namespace fracfem
