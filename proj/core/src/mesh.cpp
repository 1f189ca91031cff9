#include "fracfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "fracfem/dd.hpp"

namespace fracfem {

QuadMesh::QuadMesh(Box domain, int nx, int ny, int max_level)
    : domain_(domain), nx_(nx), ny_(ny), max_level_(max_level) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("QuadMesh: empty base grid");
  if (max_level < 0 || max_level > 20)
    throw std::invalid_argument("QuadMesh: max_level out of range");
  scale_ = std::int64_t(1) << max_level_;
  cells_.reserve(std::size_t(nx) * std::size_t(ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      Cell c;
      c.gx = std::int64_t(i) * scale_;
      c.gy = std::int64_t(j) * scale_;
      cells_.push_back(c);
    }
}

std::int64_t QuadMesh::cell_size(int c) const {
  return scale_ >> cells_[std::size_t(c)].level;
}

std::vector<int> QuadMesh::leaves() const {
  std::vector<int> out;
  for (std::size_t c = 0; c < cells_.size(); ++c)
    if (cells_[c].child0 < 0) out.push_back(int(c));
  return out;
}

Box QuadMesh::cell_box(int c) const {
  const Cell& cc = cells_[std::size_t(c)];
  const std::int64_t s = cell_size(c);
  const std::int64_t W = std::int64_t(nx_) * scale_;
  const std::int64_t H = std::int64_t(ny_) * scale_;
  const double ix = domain_.width() / double(W);
  const double iy = domain_.height() / double(H);
  // boundary coordinates snap exactly so BC segment matching is robust
  auto gx2x = [&](std::int64_t g) { return g == W ? domain_.x1 : domain_.x0 + double(g) * ix; };
  auto gy2y = [&](std::int64_t g) { return g == H ? domain_.y1 : domain_.y0 + double(g) * iy; };
  return Box{gx2x(cc.gx), gy2y(cc.gy), gx2x(cc.gx + s), gy2y(cc.gy + s)};
}

int QuadMesh::locate_leaf(std::int64_t gx, std::int64_t gy) const {
  const std::int64_t W = std::int64_t(nx_) * scale_;
  const std::int64_t H = std::int64_t(ny_) * scale_;
  gx = std::clamp<std::int64_t>(gx, 0, W - 1);
  gy = std::clamp<std::int64_t>(gy, 0, H - 1);
  int c = int((gy / scale_) * nx_ + gx / scale_);
  while (cells_[std::size_t(c)].child0 >= 0) {
    const Cell& cc = cells_[std::size_t(c)];
    const std::int64_t half = cell_size(c) / 2;
    const int idx = int(gx >= cc.gx + half) + 2 * int(gy >= cc.gy + half);
    c = cc.child0 + idx;
  }
  return c;
}

void QuadMesh::split(int c) {
  // Copy: the push_backs below may reallocate and would invalidate a
  // reference into cells_.
  const Cell parent = cells_[std::size_t(c)];
  if (parent.level >= max_level_)
    throw std::runtime_error("QuadMesh: refinement exceeds max_level");
  const std::int64_t half = cell_size(c) / 2;
  cells_[std::size_t(c)].child0 = int(cells_.size());
  for (int k = 0; k < 4; ++k) {
    Cell ch;
    ch.parent = c;
    ch.level = std::int16_t(parent.level + 1);
    ch.gx = parent.gx + (k & 1 ? half : 0);
    ch.gy = parent.gy + (k & 2 ? half : 0);
    cells_.push_back(ch);
  }
}

void QuadMesh::split_with_closure(int c) {
  const int level = cells_[std::size_t(c)].level;
  const std::int64_t s = cell_size(c);
  const std::int64_t gx = cells_[std::size_t(c)].gx;
  const std::int64_t gy = cells_[std::size_t(c)].gy;
  const std::int64_t W = std::int64_t(nx_) * scale_;
  const std::int64_t H = std::int64_t(ny_) * scale_;

  // Edge-neighbor probes; existing 2:1 balance bounds neighbors to
  // level-1, so one coarser split per side restores the precondition.
  const std::int64_t px[4] = {gx + s, gx - 1, gx + s / 2, gx + s / 2};
  const std::int64_t py[4] = {gy + s / 2, gy + s / 2, gy + s, gy - 1};
  for (int d = 0; d < 4; ++d) {
    if (px[d] < 0 || px[d] >= W || py[d] < 0 || py[d] >= H) continue;
    int nb = locate_leaf(px[d], py[d]);
    while (cells_[std::size_t(nb)].level < level) {
      split_with_closure(nb);
      nb = locate_leaf(px[d], py[d]);
    }
  }
  split(c);
}

void QuadMesh::refine(const std::vector<int>& marked) {
  for (int c : marked) {
    if (c < 0 || std::size_t(c) >= cells_.size())
      throw std::invalid_argument("QuadMesh::refine: bad cell id");
    if (cells_[std::size_t(c)].child0 < 0) split_with_closure(c);
  }
}

void QuadMesh::amr_against_fractures(const MaterialField& field, int steps) {
  for (int s = 0; s < steps; ++s) {
    std::vector<int> marked;
    for (int c : leaves()) {
      if (field.box_intersects_any_fracture(cell_box(c))) marked.push_back(c);
    }
    refine(marked);
  }
}

void QuadMesh::uniform_refine(int steps) {
  for (int s = 0; s < steps; ++s) refine(leaves());
}

MeshView QuadMesh::view() const {
  MeshView mv;
  mv.domain = domain_;
  const std::int64_t W = std::int64_t(nx_) * scale_;
  const std::int64_t H = std::int64_t(ny_) * scale_;
  const double ix = domain_.width() / double(W);
  const double iy = domain_.height() / double(H);

  std::unordered_map<std::int64_t, int> ids;
  auto key = [&](std::int64_t gx, std::int64_t gy) { return gy * (W + 1) + gx; };
  auto node = [&](std::int64_t gx, std::int64_t gy) {
    auto [it, inserted] = ids.try_emplace(key(gx, gy), int(mv.nodes.size()));
    if (inserted)
      mv.nodes.push_back(
          {gx == W ? domain_.x1 : domain_.x0 + double(gx) * ix,
           gy == H ? domain_.y1 : domain_.y0 + double(gy) * iy});
    return it->second;
  };

  const std::vector<int> lf = leaves();
  mv.cells.reserve(lf.size());
  mv.boxes.reserve(lf.size());
  for (int c : lf) {
    const Cell& cc = cells_[std::size_t(c)];
    const std::int64_t s = cell_size(c);
    mv.cells.push_back({node(cc.gx, cc.gy), node(cc.gx + s, cc.gy),
                        node(cc.gx, cc.gy + s), node(cc.gx + s, cc.gy + s)});
    mv.boxes.push_back(cell_box(c));
  }

  // Hanging nodes: a mid-edge key present in the node table hangs on that
  // (coarse) edge; the two fine neighbors see it as a corner.
  for (std::size_t li = 0; li < lf.size(); ++li) {
    const Cell& cc = cells_[std::size_t(lf[li])];
    const std::int64_t s = cell_size(lf[li]);
    if (s < 2) continue;
    const auto& cn = mv.cells[li];
    const struct { std::int64_t mx, my; int a, b; } edges[4] = {
        {cc.gx + s / 2, cc.gy, 0, 1},          // south
        {cc.gx + s / 2, cc.gy + s, 2, 3},      // north
        {cc.gx, cc.gy + s / 2, 0, 2},          // west
        {cc.gx + s, cc.gy + s / 2, 1, 3},      // east
    };
    for (const auto& e : edges) {
      auto it = ids.find(key(e.mx, e.my));
      if (it != ids.end())
        mv.hangings.push_back({it->second, cn[std::size_t(e.a)],
                               cn[std::size_t(e.b)]});
    }
  }
  return mv;
}

MeshAudit QuadMesh::audit() const {
  MeshAudit a;
  auto fail = [&](const std::string& what) {
    if (a.ok) { a.ok = false; a.detail = what; }
  };

  const std::vector<int> lf = leaves();
  DD area;
  for (int c : lf) {
    Box b = cell_box(c);
    if (!(b.width() > 0 && b.height() > 0)) fail("degenerate leaf");
    area += dd_prod(b.width(), b.height());
  }
  a.area_rel_error =
      std::abs((area - dd_prod(domain_.width(), domain_.height())).value()) /
      domain_.area();
  if (a.area_rel_error > 1e-12) fail("leaf areas do not sum to domain area");

  // Edge-neighbor level jumps via probes just outside each leaf edge.
  const std::int64_t W = std::int64_t(nx_) * scale_;
  const std::int64_t H = std::int64_t(ny_) * scale_;
  for (int c : lf) {
    const Cell& cc = cells_[std::size_t(c)];
    const std::int64_t s = cell_size(c);
    // Probe both halves of each side so finer neighbors are all seen.
    const std::int64_t qs = std::max<std::int64_t>(s / 4, 0);
    const std::int64_t pxs[8] = {cc.gx + s, cc.gx + s,
                                 cc.gx - 1, cc.gx - 1,
                                 cc.gx + qs, cc.gx + s - 1 - qs,
                                 cc.gx + qs, cc.gx + s - 1 - qs};
    const std::int64_t pys[8] = {cc.gy + qs, cc.gy + s - 1 - qs,
                                 cc.gy + qs, cc.gy + s - 1 - qs,
                                 cc.gy + s, cc.gy + s,
                                 cc.gy - 1, cc.gy - 1};
    for (int d = 0; d < 8; ++d) {
      if (pxs[d] < 0 || pxs[d] >= W || pys[d] < 0 || pys[d] >= H) continue;
      int nb = locate_leaf(pxs[d], pys[d]);
      int jump = std::abs(int(cells_[std::size_t(nb)].level) - int(cc.level));
      a.max_level_jump = std::max(a.max_level_jump, jump);
    }
  }
  if (a.max_level_jump > 1) fail("2:1 balance violated");

  // Hanging-node counts per edge from the flat view.
  MeshView mv = view();
  a.hanging_nodes = int(mv.hangings.size());
  std::map<std::pair<int, int>, int> per_edge;
  for (const auto& h : mv.hangings) {
    auto e = std::minmax(h.ma, h.mb);
    a.max_hanging_per_edge =
        std::max(a.max_hanging_per_edge, ++per_edge[{e.first, e.second}]);
  }
  if (a.max_hanging_per_edge > 1) fail("edge with more than one hanging node");

  MeshAudit va = audit_view(mv);
  if (!va.ok) fail("view audit: " + va.detail);
  return a;
}

MeshView tensor_mesh(const std::vector<double>& x_lines,
                     const std::vector<double>& y_lines) {
  if (x_lines.size() < 2 || y_lines.size() < 2)
    throw std::invalid_argument("tensor_mesh: need at least 2 lines per axis");
  MeshView mv;
  const int nx = int(x_lines.size()), ny = int(y_lines.size());
  mv.domain = Box{x_lines.front(), y_lines.front(), x_lines.back(), y_lines.back()};
  mv.nodes.reserve(std::size_t(nx) * std::size_t(ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) mv.nodes.push_back({x_lines[std::size_t(i)], y_lines[std::size_t(j)]});
  auto id = [&](int i, int j) { return j * nx + i; };
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      mv.cells.push_back({id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)});
      mv.boxes.push_back(Box{x_lines[std::size_t(i)], y_lines[std::size_t(j)],
                             x_lines[std::size_t(i) + 1], y_lines[std::size_t(j) + 1]});
    }
  return mv;
}

std::vector<double> band_lines(
    double lo, double hi, int be, int fe,
    const std::vector<std::pair<double, double>>& bands) {
  if (be < 1 || fe < 1) throw std::invalid_argument("band_lines: be, fe >= 1");
  const double tol = 1e-14 * (hi - lo);
  std::vector<double> lines;
  for (int i = 0; i <= be; ++i) {
    double u = lo + (hi - lo) * double(i) / double(be);
    bool inside = false;
    for (auto [c, h] : bands)
      if (u > c - h - tol && u < c + h + tol) { inside = true; break; }
    if (!inside) lines.push_back(u);
  }
  for (auto [c, h] : bands) {
    if (c - h < lo - tol || c + h > hi + tol) continue;   // band outside axis range
    for (int i = 0; i <= fe; ++i)
      lines.push_back(c - h + 2 * h * double(i) / double(fe));
  }
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end(),
                          [&](double a, double b) { return b - a < tol; }),
              lines.end());
  return lines;
}

namespace {

std::vector<std::vector<double>> read_csv_numeric(const std::string& path,
                                                  std::size_t min_cols) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size()) { numeric = false; break; }
        vals.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) { first = false; continue; }  // header row
      throw std::runtime_error(path + ": non-numeric row");
    }
    first = false;
    if (vals.size() < min_cols)
      throw std::runtime_error(path + ": expected at least " +
                               std::to_string(min_cols) + " columns");
    rows.push_back(std::move(vals));
  }
  return rows;
}

}  // namespace

MeshView import_mesh_csv(const std::string& nodes_path,
                         const std::string& cells_path) {
  MeshView mv;
  for (const auto& r : read_csv_numeric(nodes_path, 2))
    mv.nodes.push_back({r[0], r[1]});
  if (mv.nodes.empty()) throw std::runtime_error(nodes_path + ": no nodes");

  double x0 = mv.nodes[0].x, x1 = x0, y0 = mv.nodes[0].y, y1 = y0;
  for (const auto& p : mv.nodes) {
    x0 = std::min(x0, p.x); x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y); y1 = std::max(y1, p.y);
  }
  mv.domain = Box{x0, y0, x1, y1};

  for (const auto& r : read_csv_numeric(cells_path, 4)) {
    std::array<int, 4> raw;
    for (int k = 0; k < 4; ++k) {
      double v = r[std::size_t(k)];
      raw[std::size_t(k)] = int(v);
      if (double(raw[std::size_t(k)]) != v || raw[std::size_t(k)] < 0 ||
          std::size_t(raw[std::size_t(k)]) >= mv.nodes.size())
        throw std::runtime_error(cells_path + ": bad node id");
    }
    // Normalize corner order to SW,SE,NW,NE and verify the rectangle.
    double cx0 = mv.nodes[std::size_t(raw[0])].x, cx1 = cx0;
    double cy0 = mv.nodes[std::size_t(raw[0])].y, cy1 = cy0;
    for (int k = 1; k < 4; ++k) {
      const Point& p = mv.nodes[std::size_t(raw[std::size_t(k)])];
      cx0 = std::min(cx0, p.x); cx1 = std::max(cx1, p.x);
      cy0 = std::min(cy0, p.y); cy1 = std::max(cy1, p.y);
    }
    if (!(cx1 > cx0 && cy1 > cy0))
      throw std::runtime_error(cells_path + ": degenerate cell");
    std::array<int, 4> ordered{-1, -1, -1, -1};
    for (int id : raw) {
      const Point& p = mv.nodes[std::size_t(id)];
      int i = (p.x == cx0) ? 0 : (p.x == cx1 ? 1 : -1);
      int j = (p.y == cy0) ? 0 : (p.y == cy1 ? 1 : -1);
      if (i < 0 || j < 0)
        throw std::runtime_error(cells_path + ": cell is not an axis-aligned rectangle");
      ordered[std::size_t(j * 2 + i)] = id;
    }
    for (int id : ordered)
      if (id < 0) throw std::runtime_error(cells_path + ": repeated cell corner");
    mv.cells.push_back(ordered);
    mv.boxes.push_back(Box{cx0, cy0, cx1, cy1});
  }
  if (mv.cells.empty()) throw std::runtime_error(cells_path + ": no cells");
  return mv;
}

MeshAudit audit_view(const MeshView& mv) {
  MeshAudit a;
  auto fail = [&](const std::string& what) {
    if (a.ok) { a.ok = false; a.detail = what; }
  };

  DD area;
  for (std::size_t c = 0; c < mv.cells.size(); ++c) {
    const auto& cn = mv.cells[c];
    const Box& b = mv.boxes[c];
    if (!(b.width() > 0 && b.height() > 0)) fail("degenerate cell box");
    for (int k = 0; k < 4; ++k)
      if (cn[std::size_t(k)] < 0 || std::size_t(cn[std::size_t(k)]) >= mv.nodes.size())
        fail("cell references missing node");
    if (!a.ok) break;
    const Point sw = mv.nodes[std::size_t(cn[0])], se = mv.nodes[std::size_t(cn[1])];
    const Point nw = mv.nodes[std::size_t(cn[2])], ne = mv.nodes[std::size_t(cn[3])];
    const double tx = 1e-12 * std::max(1.0, std::abs(b.x1) + std::abs(b.x0));
    const double ty = 1e-12 * std::max(1.0, std::abs(b.y1) + std::abs(b.y0));
    if (std::abs(sw.x - b.x0) > tx || std::abs(sw.y - b.y0) > ty ||
        std::abs(se.x - b.x1) > tx || std::abs(se.y - b.y0) > ty ||
        std::abs(nw.x - b.x0) > tx || std::abs(nw.y - b.y1) > ty ||
        std::abs(ne.x - b.x1) > tx || std::abs(ne.y - b.y1) > ty)
      fail("cell corners disagree with cell box");
    area += dd_prod(b.width(), b.height());
  }
  a.area_rel_error =
      std::abs((area - dd_prod(mv.domain.width(), mv.domain.height())).value()) /
      mv.domain.area();
  if (a.area_rel_error > 1e-12) fail("cell areas do not sum to domain area");

  a.hanging_nodes = int(mv.hangings.size());
  std::map<std::pair<int, int>, int> per_edge;
  for (const auto& h : mv.hangings) {
    if (h.node < 0 || std::size_t(h.node) >= mv.nodes.size() || h.ma == h.mb)
      fail("malformed hanging constraint");
    const Point p = mv.nodes[std::size_t(h.node)];
    const Point pa = mv.nodes[std::size_t(h.ma)], pb = mv.nodes[std::size_t(h.mb)];
    if (std::abs(p.x - (pa.x + pb.x) / 2) > 1e-12 * (1 + std::abs(p.x)) ||
        std::abs(p.y - (pa.y + pb.y) / 2) > 1e-12 * (1 + std::abs(p.y)))
      fail("hanging node is not the edge midpoint");
    auto e = std::minmax(h.ma, h.mb);
    a.max_hanging_per_edge =
        std::max(a.max_hanging_per_edge, ++per_edge[{e.first, e.second}]);
  }
  if (a.max_hanging_per_edge > 1) fail("edge with more than one hanging node");
  return a;
}

}  // namespace fracfem
