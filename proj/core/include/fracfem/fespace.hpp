// Conforming Q1 space on 1-irregular meshes: regular nodes carry dofs,
// hanging nodes are eliminated through mid-edge interpolation constraints,
// resolved recursively when a master is itself hanging.
#pragma once

#include <array>
#include <vector>

#include "fracfem/mesh.hpp"

namespace fracfem {

struct FESpace {
  const MeshView* mesh = nullptr;
  int n_h = 0;  // all mesh nodes
  int n_r = 0;  // regular dofs

  std::vector<int> node_dof;  // node -> dof, -1 for hanging nodes
  std::vector<int> dof_node;  // dof -> node

  struct Term {
    int dof;
    double w;
  };
  // Expansion of every node value in regular dofs; a regular node expands
  // to itself with weight 1. Weights are dyadic (products of 1/2), sorted
  // by dof, and sum to 1.
  std::vector<std::vector<Term>> expansion;

  // Prolongation: node values from dof values (P c^r).
  std::vector<double> prolongate(const std::vector<double>& c_r) const;

  // Restriction applied to a node-indexed functional (R w^H).
  std::vector<double> restrict_functional(const std::vector<double>& w_h) const;

  // Union of dofs reached by the cell's 4 corners, sorted ascending, plus
  // the dense elemental restriction R_E (rows: dofs, cols: 4 corners).
  struct CellCoupling {
    std::array<int, 8> dofs;   // n_dofs entries used
    int n_dofs = 0;
    // r[row][corner]; rows follow `dofs`
    std::array<std::array<double, 4>, 8> r;
  };
  CellCoupling cell_coupling(std::size_t cell) const;

  // Bilinear evaluation of a dof vector inside a cell at point p.
  double eval(std::size_t cell, Point p, const std::vector<double>& c_r) const;
  // Gradient of the bilinear interpolant at p.
  Point eval_grad(std::size_t cell, Point p, const std::vector<double>& c_r) const;
};

FESpace build_fespace(const MeshView& mv);

}  // namespace fracfem
