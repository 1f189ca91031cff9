#include "fracfem/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace fracfem {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

struct KV {
  std::string key, value;
  int line = 0;
  bool used = false;
};

struct Sec {
  std::string name;
  int line = 0;
  std::vector<KV> kvs;
};

// Typed key access over one section; unread keys become errors in finish().
class SecReader {
 public:
  SecReader(Sec& s, std::vector<std::string>& errs) : s_(s), errs_(errs) {}

  int line() const { return s_.line; }

  bool has(const std::string& key) const {
    for (const KV& kv : s_.kvs)
      if (kv.key == key) return true;
    return false;
  }

  std::optional<std::string> str(const std::string& key, bool required = false) {
    KV* kv = take(key);
    if (!kv) {
      if (required) miss(key);
      return std::nullopt;
    }
    return kv->value;
  }

  std::optional<double> num(const std::string& key, bool required = false) {
    KV* kv = take(key);
    if (!kv) {
      if (required) miss(key);
      return std::nullopt;
    }
    return to_num(kv->value, kv->line, key);
  }

  std::optional<int> integer(const std::string& key, bool required = false) {
    KV* kv = take(key);
    if (!kv) {
      if (required) miss(key);
      return std::nullopt;
    }
    try {
      std::size_t pos = 0;
      int v = std::stoi(kv->value, &pos);
      if (pos != kv->value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      err(kv->line, fmt::format("key '{}': not an integer: '{}'", key, kv->value));
      return std::nullopt;
    }
  }

  std::optional<bool> boolean(const std::string& key, bool required = false) {
    KV* kv = take(key);
    if (!kv) {
      if (required) miss(key);
      return std::nullopt;
    }
    if (kv->value == "true") return true;
    if (kv->value == "false") return false;
    err(kv->line, fmt::format("key '{}': expected true or false, got '{}'", key, kv->value));
    return std::nullopt;
  }

  std::optional<Point> point(const std::string& key, bool required = false) {
    KV* kv = take(key);
    if (!kv) {
      if (required) miss(key);
      return std::nullopt;
    }
    return to_point(kv->value, kv->line, key);
  }

  // `n` whitespace-separated "x,y" tokens.
  std::optional<std::vector<Point>> points(const std::string& key, std::size_t n,
                                           bool required = false) {
    KV* kv = take(key);
    if (!kv) {
      if (required) miss(key);
      return std::nullopt;
    }
    std::vector<std::string> toks = split_ws(kv->value);
    if (toks.size() != n) {
      err(kv->line, fmt::format("key '{}': expected {} points 'x,y', got {} tokens", key, n,
                                toks.size()));
      return std::nullopt;
    }
    std::vector<Point> out;
    for (const std::string& t : toks) {
      std::optional<Point> p = to_point(t, kv->line, key);
      if (!p) return std::nullopt;
      out.push_back(*p);
    }
    return out;
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    KV* kv = take(key);
    if (!kv) return std::nullopt;
    std::vector<double> out;
    for (const std::string& t : split_ws(kv->value)) {
      std::optional<double> v = to_num(t, kv->line, key);
      if (!v) return std::nullopt;
      out.push_back(*v);
    }
    return out;
  }

  void finish() {
    for (const KV& kv : s_.kvs)
      if (!kv.used) err(kv.line, fmt::format("unknown key '{}' in section [{}]", kv.key, s_.name));
  }

 private:
  KV* take(const std::string& key) {
    for (KV& kv : s_.kvs)
      if (kv.key == key && !kv.used) {
        kv.used = true;
        return &kv;
      }
    return nullptr;
  }

  std::optional<double> to_num(const std::string& v, int line, const std::string& key) {
    try {
      std::size_t pos = 0;
      double d = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      if (!std::isfinite(d)) throw std::invalid_argument("non-finite");
      return d;
    } catch (const std::exception&) {
      err(line, fmt::format("key '{}': not a number: '{}'", key, v));
      return std::nullopt;
    }
  }

  std::optional<Point> to_point(const std::string& v, int line, const std::string& key) {
    std::size_t comma = v.find(',');
    if (comma == std::string::npos || v.find(',', comma + 1) != std::string::npos) {
      err(line, fmt::format("key '{}': expected 'x,y', got '{}'", key, v));
      return std::nullopt;
    }
    std::optional<double> x = to_num(trim(v.substr(0, comma)), line, key);
    std::optional<double> y = to_num(trim(v.substr(comma + 1)), line, key);
    if (!x || !y) return std::nullopt;
    return Point{*x, *y};
  }

  void miss(const std::string& key) {
    err(s_.line, fmt::format("section [{}]: missing required key '{}'", s_.name, key));
  }

  void err(int line, const std::string& msg) { errs_.push_back(fmt::format("line {}: {}", line, msg)); }

  Sec& s_;
  std::vector<std::string>& errs_;
};

constexpr const char* kVersionTag = "fracfem-config/1";

bool side_from_name(const std::string& name, int& side) {
  if (name == "west") side = 0;
  else if (name == "east") side = 1;
  else if (name == "south") side = 2;
  else if (name == "north") side = 3;
  else return false;
  return true;
}

bool safe_id(const std::string& id) {
  if (id.empty()) return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      return false;
  return true;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> errs)
    : std::runtime_error(errs.empty() ? std::string("invalid configuration")
                                      : fmt::format("invalid configuration:\n  {}",
                                                    fmt::join(errs, "\n  "))),
      errors(std::move(errs)) {}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read file: {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ParseResult parse_config(const std::string& text) {
  ParseResult out;
  std::vector<std::string>& errs = out.errors;
  RunConfig& cfg = out.config;
  cfg.hash_hex = hash_hex(fnv1a64(text));

  // ---- Line scan into sections -------------------------------------------
  std::vector<Sec> secs;
  bool version_seen = false;
  {
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    Sec* cur = nullptr;
    while (std::getline(is, raw)) {
      ++line_no;
      std::size_t hash = raw.find('#');
      if (hash != std::string::npos) raw.resize(hash);
      std::string line = trim(raw);
      if (line.empty()) continue;
      if (!version_seen) {
        if (line == kVersionTag) {
          version_seen = true;
          continue;
        }
        errs.push_back(fmt::format("line {}: first line must be the version tag '{}'", line_no,
                                   kVersionTag));
        version_seen = true;  // report once, keep parsing
      }
      if (line.front() == '[') {
        if (line.back() != ']' || line.size() < 3) {
          errs.push_back(fmt::format("line {}: malformed section header '{}'", line_no, line));
          cur = nullptr;
          continue;
        }
        secs.push_back(Sec{trim(line.substr(1, line.size() - 2)), line_no, {}});
        cur = &secs.back();
        continue;
      }
      std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        errs.push_back(fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
        continue;
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty()) {
        errs.push_back(fmt::format("line {}: empty key or value", line_no));
        continue;
      }
      if (!cur) {
        errs.push_back(fmt::format("line {}: key '{}' outside any section", line_no, key));
        continue;
      }
      cur->kvs.push_back(KV{key, value, line_no, false});
    }
    if (!version_seen)
      errs.push_back(fmt::format("line 1: missing version tag '{}'", kVersionTag));
  }

  // ---- Bucket sections, rejecting unknown names and duplicate singletons --
  const std::vector<std::string> singletons = {"domain", "materials", "mesh",
                                               "flow",   "transport", "output"};
  const std::vector<std::string> repeatable = {"fracture",     "region",
                                               "flow.bc",      "transport.bc",
                                               "post.interface", "post.line"};
  std::map<std::string, std::vector<Sec*>> buckets;
  for (Sec& s : secs) {
    bool single = std::find(singletons.begin(), singletons.end(), s.name) != singletons.end();
    bool repeat = std::find(repeatable.begin(), repeatable.end(), s.name) != repeatable.end();
    if (!single && !repeat) {
      errs.push_back(fmt::format("line {}: unknown section [{}]", s.line, s.name));
      continue;
    }
    std::vector<Sec*>& bucket = buckets[s.name];
    if (single && !bucket.empty()) {
      errs.push_back(fmt::format("line {}: duplicate section [{}]", s.line, s.name));
      continue;
    }
    bucket.push_back(&s);
  }
  auto get_single = [&](const std::string& name) -> Sec* {
    auto it = buckets.find(name);
    return it == buckets.end() ? nullptr : it->second.front();
  };
  auto get_all = [&](const std::string& name) -> std::vector<Sec*> {
    auto it = buckets.find(name);
    return it == buckets.end() ? std::vector<Sec*>{} : it->second;
  };

  // ---- [domain] ------------------------------------------------------------
  bool domain_ok = false;
  if (Sec* s = get_single("domain")) {
    SecReader r(*s, errs);
    std::optional<double> x0 = r.num("x0", true), y0 = r.num("y0", true);
    std::optional<double> x1 = r.num("x1", true), y1 = r.num("y1", true);
    r.finish();
    if (x0 && y0 && x1 && y1) {
      cfg.domain = Box{*x0, *y0, *x1, *y1};
      if (*x0 < *x1 && *y0 < *y1)
        domain_ok = true;
      else
        errs.push_back(fmt::format("line {}: [domain] needs x0 < x1 and y0 < y1", r.line()));
    }
  } else {
    errs.push_back("missing required section [domain]");
  }
  cfg.materials.domain = cfg.domain;
  const double geo_tol =
      1e-9 * std::max({1.0, cfg.domain.width(), cfg.domain.height()});
  auto in_domain = [&](Point p) {
    return p.x >= cfg.domain.x0 - geo_tol && p.x <= cfg.domain.x1 + geo_tol &&
           p.y >= cfg.domain.y0 - geo_tol && p.y <= cfg.domain.y1 + geo_tol;
  };
  auto inside_open = [&](Point p) {
    return p.x > cfg.domain.x0 + geo_tol && p.x < cfg.domain.x1 - geo_tol &&
           p.y > cfg.domain.y0 + geo_tol && p.y < cfg.domain.y1 - geo_tol;
  };

  // ---- [materials] ----------------------------------------------------------
  if (Sec* s = get_single("materials")) {
    SecReader r(*s, errs);
    auto pos = [&](const char* key, double& dst) {
      if (std::optional<double> v = r.num(key)) {
        if (*v > 0.0)
          dst = *v;
        else
          errs.push_back(fmt::format("line {}: key '{}' must be > 0", r.line(), key));
      }
    };
    pos("matrix_k", cfg.materials.matrix_k);
    pos("matrix_phi", cfg.materials.matrix_phi);
    pos("fracture_k", cfg.materials.fracture_k);
    pos("fracture_phi", cfg.materials.fracture_phi);
    r.finish();
  }

  // ---- [fracture]* ----------------------------------------------------------
  for (Sec* s : get_all("fracture")) {
    SecReader r(*s, errs);
    bool seg_form = r.has("segment"), ctr_form = r.has("center"), crn_form = r.has("corners");
    int forms = int(seg_form) + int(ctr_form) + int(crn_form);
    if (forms != 1) {
      errs.push_back(fmt::format(
          "line {}: [fracture] needs exactly one of 'segment', 'center', or 'corners'", s->line));
      continue;  // keys stay unread on purpose; skip unknown-key noise
    }
    std::optional<Fracture> frac;
    if (seg_form) {
      std::optional<std::vector<Point>> seg = r.points("segment", 2, true);
      std::optional<double> ap = r.num("aperture", true);
      if (seg && ap) {
        Point a = (*seg)[0], b = (*seg)[1];
        if (std::hypot(b.x - a.x, b.y - a.y) <= 0.0)
          errs.push_back(fmt::format("line {}: fracture segment has zero length", s->line));
        else if (*ap <= 0.0)
          errs.push_back(fmt::format("line {}: fracture aperture must be > 0", s->line));
        else
          frac = Fracture::from_segment(a, b, *ap);
      }
    } else if (ctr_form) {
      std::optional<Point> c = r.point("center", true);
      std::optional<double> hl = r.num("half_length", true);
      std::optional<double> ha = r.num("half_aperture", true);
      std::optional<double> ang = r.num("angle");
      if (c && hl && ha) {
        if (*hl <= 0.0 || *ha <= 0.0)
          errs.push_back(
              fmt::format("line {}: fracture half extents must be > 0", s->line));
        else
          frac = Fracture{*c, *hl, *ha, ang.value_or(0.0)};
      }
    } else {
      std::optional<std::vector<Point>> c = r.points("corners", 4, true);
      if (c) {
        try {
          frac = Fracture::from_corners({(*c)[0], (*c)[1], (*c)[2], (*c)[3]});
        } catch (const std::exception& e) {
          errs.push_back(fmt::format("line {}: {}", s->line, e.what()));
        }
      }
    }
    r.finish();
    if (!frac) continue;
    if (domain_ok) {
      // The centerline must stay inside; the band itself may overhang the
      // boundary by its half-aperture (classification clips to the domain).
      Point ax = frac->axis();
      Point e0{frac->center.x - frac->half_length * ax.x,
               frac->center.y - frac->half_length * ax.y};
      Point e1{frac->center.x + frac->half_length * ax.x,
               frac->center.y + frac->half_length * ax.y};
      if (!in_domain(e0) || !in_domain(e1))
        errs.push_back(
            fmt::format("line {}: fracture extends outside the domain", s->line));
    }
    cfg.materials.fractures.push_back(*frac);
  }

  // ---- [region]* -------------------------------------------------------------
  for (Sec* s : get_all("region")) {
    SecReader r(*s, errs);
    std::optional<std::vector<Point>> corners = r.points("box", 2, true);
    std::optional<double> k = r.num("k", true);
    std::optional<double> phi = r.num("phi", true);
    r.finish();
    if (!corners || !k || !phi) continue;
    Box b{(*corners)[0].x, (*corners)[0].y, (*corners)[1].x, (*corners)[1].y};
    if (!(b.x0 < b.x1 && b.y0 < b.y1)) {
      errs.push_back(fmt::format("line {}: region box needs 'x0,y0 x1,y1' with x0 < x1, y0 < y1",
                                 s->line));
      continue;
    }
    if (*k <= 0.0 || *phi <= 0.0) {
      errs.push_back(fmt::format("line {}: region k and phi must be > 0", s->line));
      continue;
    }
    if (domain_ok &&
        !(in_domain(Point{b.x0, b.y0}) && in_domain(Point{b.x1, b.y1}))) {
      errs.push_back(fmt::format("line {}: region box extends outside the domain", s->line));
      continue;
    }
    cfg.materials.regions.push_back(MatrixRegion{b, *k, *phi});
  }

  // ---- [mesh] -----------------------------------------------------------------
  if (Sec* s = get_single("mesh")) {
    SecReader r(*s, errs);
    bool import_form = r.has("nodes_csv") || r.has("cells_csv");
    if (import_form) {
      cfg.mesh.imported = true;
      std::optional<std::string> nodes = r.str("nodes_csv", true);
      std::optional<std::string> cells = r.str("cells_csv", true);
      if (nodes) cfg.mesh.nodes_csv = *nodes;
      if (cells) cfg.mesh.cells_csv = *cells;
      for (const char* key : {"be_x", "be_y", "amr_steps", "max_level"})
        if (r.has(key))
          errs.push_back(fmt::format(
              "line {}: [mesh] mixes import keys with generator key '{}'", s->line, key));
    } else {
      std::optional<int> bx = r.integer("be_x", true);
      std::optional<int> by = r.integer("be_y", true);
      std::optional<int> amr = r.integer("amr_steps");
      std::optional<int> lvl = r.integer("max_level");
      if (bx) cfg.mesh.be_x = *bx;
      if (by) cfg.mesh.be_y = *by;
      cfg.mesh.amr_steps = amr.value_or(0);
      cfg.mesh.max_level = lvl.value_or(12);
      if ((bx && *bx < 1) || (by && *by < 1))
        errs.push_back(fmt::format("line {}: be_x and be_y must be >= 1", s->line));
      if (cfg.mesh.amr_steps < 0)
        errs.push_back(fmt::format("line {}: amr_steps must be >= 0", s->line));
      if (cfg.mesh.max_level < 1 || cfg.mesh.max_level > 24)
        errs.push_back(fmt::format("line {}: max_level must be in [1, 24]", s->line));
      else if (cfg.mesh.amr_steps > cfg.mesh.max_level)
        errs.push_back(
            fmt::format("line {}: amr_steps must not exceed max_level", s->line));
    }
    r.finish();
  } else {
    errs.push_back("missing required section [mesh]");
  }

  // ---- [flow] + [flow.bc]* ------------------------------------------------------
  if (Sec* s = get_single("flow")) {
    SecReader r(*s, errs);
    if (std::optional<bool> st = r.boolean("stabilize")) cfg.flow.stabilize = *st;
    if (std::optional<int> ir = r.integer("ir_passes")) {
      if (*ir < 0)
        errs.push_back(fmt::format("line {}: ir_passes must be >= 0", r.line()));
      else
        cfg.flow.ir_passes = *ir;
    }
    r.finish();
  }

  auto read_bc = [&](Sec* s, bool want_type) -> std::optional<BCSegment> {
    SecReader r(*s, errs);
    std::optional<std::string> side_name = r.str("side", true);
    std::optional<double> lo = r.num("lo");
    std::optional<double> hi = r.num("hi");
    std::optional<std::string> type = want_type ? r.str("type", true) : std::nullopt;
    std::optional<double> value = r.num("value", true);
    r.finish();
    if (!side_name || !value || (want_type && !type)) return std::nullopt;
    BCSegment bc;
    if (!side_from_name(*side_name, bc.side)) {
      errs.push_back(fmt::format(
          "line {}: side must be west, east, south, or north; got '{}'", s->line, *side_name));
      return std::nullopt;
    }
    if (want_type) {
      if (*type == "dirichlet")
        bc.dirichlet = true;
      else if (*type == "neumann")
        bc.dirichlet = false;
      else {
        errs.push_back(fmt::format("line {}: type must be dirichlet or neumann; got '{}'",
                                   s->line, *type));
        return std::nullopt;
      }
    } else {
      bc.dirichlet = true;
    }
    bc.value = *value;
    double ext_lo = (bc.side <= 1) ? cfg.domain.y0 : cfg.domain.x0;
    double ext_hi = (bc.side <= 1) ? cfg.domain.y1 : cfg.domain.x1;
    bc.lo = lo.value_or(ext_lo);
    bc.hi = hi.value_or(ext_hi);
    if (!(bc.lo < bc.hi)) {
      errs.push_back(fmt::format("line {}: bc segment needs lo < hi", s->line));
      return std::nullopt;
    }
    if (domain_ok && (bc.lo < ext_lo - geo_tol || bc.hi > ext_hi + geo_tol)) {
      errs.push_back(fmt::format(
          "line {}: bc segment [{}, {}] falls outside the {} side extent [{}, {}]", s->line,
          bc.lo, bc.hi, *side_name, ext_lo, ext_hi));
      return std::nullopt;
    }
    return bc;
  };
  auto check_overlaps = [&](const std::vector<BCSegment>& bcs, const char* what) {
    for (std::size_t i = 0; i < bcs.size(); ++i)
      for (std::size_t j = i + 1; j < bcs.size(); ++j) {
        if (bcs[i].side != bcs[j].side) continue;
        double over = std::min(bcs[i].hi, bcs[j].hi) - std::max(bcs[i].lo, bcs[j].lo);
        if (over > geo_tol) {
          errs.push_back(fmt::format("{} segments overlap on one side (length {})", what, over));
          return;
        }
      }
  };

  for (Sec* s : get_all("flow.bc"))
    if (std::optional<BCSegment> bc = read_bc(s, true)) cfg.flow.bcs.push_back(*bc);
  check_overlaps(cfg.flow.bcs, "flow bc");
  if (get_single("mesh") && get_single("domain")) {
    bool any_dirichlet = false;
    for (const BCSegment& bc : cfg.flow.bcs) any_dirichlet |= bc.dirichlet;
    if (!any_dirichlet)
      errs.push_back("flow problem needs at least one dirichlet [flow.bc] segment");
  }

  // ---- [transport] + [transport.bc]* ----------------------------------------------
  Sec* transport_sec = get_single("transport");
  if (transport_sec) {
    SecReader r(*transport_sec, errs);
    cfg.transport.enabled = r.boolean("enabled").value_or(true);
    std::optional<double> dt = r.num("dt", cfg.transport.enabled);
    std::optional<double> tf = r.num("t_final", cfg.transport.enabled);
    std::optional<double> c0 = r.num("initial_value");
    std::optional<std::string> lim = r.str("limiter");
    std::optional<int> ir = r.integer("ir_passes");
    std::optional<std::vector<double>> snaps = r.numbers("snapshots");
    r.finish();
    if (cfg.transport.enabled) {
      if (dt && tf) {
        cfg.transport.dt = *dt;
        cfg.transport.t_final = *tf;
        if (*dt <= 0.0 || *tf <= 0.0) {
          errs.push_back(fmt::format("line {}: dt and t_final must be > 0", transport_sec->line));
        } else {
          double ratio = *tf / *dt;
          long n = std::lround(ratio);
          if (n < 1 || std::abs(ratio - double(n)) > 1e-6 * std::max(1.0, ratio))
            errs.push_back(fmt::format(
                "line {}: t_final must be an integer multiple of dt", transport_sec->line));
        }
      }
      cfg.transport.initial_value = c0.value_or(0.0);
      if (lim) {
        if (*lim == "zalesak")
          cfg.transport.limiter = LimiterMode::zalesak;
        else if (*lim == "none")
          cfg.transport.limiter = LimiterMode::none;
        else if (*lim == "unity")
          cfg.transport.limiter = LimiterMode::unity;
        else
          errs.push_back(fmt::format("line {}: limiter must be zalesak, none, or unity; got '{}'",
                                     transport_sec->line, *lim));
      }
      if (ir) {
        if (*ir < 0)
          errs.push_back(fmt::format("line {}: ir_passes must be >= 0", transport_sec->line));
        else
          cfg.transport.ir_passes = *ir;
      }
      if (snaps) {
        for (double t : *snaps)
          if (t < 0.0 || (cfg.transport.t_final > 0.0 && t > cfg.transport.t_final + geo_tol))
            errs.push_back(fmt::format("line {}: snapshot time {} outside [0, t_final]",
                                       transport_sec->line, t));
        cfg.transport.snapshot_times = *snaps;
        std::sort(cfg.transport.snapshot_times.begin(), cfg.transport.snapshot_times.end());
        cfg.transport.snapshot_times.erase(
            std::unique(cfg.transport.snapshot_times.begin(), cfg.transport.snapshot_times.end()),
            cfg.transport.snapshot_times.end());
      }
    }
  }
  std::vector<Sec*> tbc_secs = get_all("transport.bc");
  if (!tbc_secs.empty() && !cfg.transport.enabled)
    errs.push_back(fmt::format("line {}: [transport.bc] without enabled transport",
                               tbc_secs.front()->line));
  for (Sec* s : tbc_secs)
    if (std::optional<BCSegment> bc = read_bc(s, false)) cfg.transport.bcs.push_back(*bc);
  check_overlaps(cfg.transport.bcs, "transport bc");

  // ---- [post.interface]* + [post.line]* ---------------------------------------------
  for (Sec* s : get_all("post.interface")) {
    SecReader r(*s, errs);
    std::optional<std::string> id = r.str("id", true);
    bool skeleton = r.boolean("skeleton").value_or(false);
    std::optional<std::vector<Point>> seg =
        r.has("segment") ? r.points("segment", 2, true) : std::nullopt;
    r.finish();
    if (!id) continue;
    if (!safe_id(*id)) {
      errs.push_back(fmt::format("line {}: interface id '{}' must match [A-Za-z0-9_.-]+",
                                 s->line, *id));
      continue;
    }
    for (const RunConfig::Interface& other : cfg.post.interfaces)
      if (other.id == *id)
        errs.push_back(fmt::format("line {}: duplicate interface id '{}'", s->line, *id));
    if (skeleton == bool(seg)) {
      errs.push_back(fmt::format(
          "line {}: interface needs either skeleton = true or a segment, not both", s->line));
      continue;
    }
    RunConfig::Interface iface;
    iface.id = *id;
    iface.skeleton = skeleton;
    if (skeleton) {
      if (cfg.materials.fractures.empty())
        errs.push_back(
            fmt::format("line {}: skeleton interface needs at least one fracture", s->line));
    } else {
      iface.a = (*seg)[0];
      iface.b = (*seg)[1];
      if (domain_ok) {
        // A flux interface must split the domain: endpoints outside the open
        // interior, and the chord between them crossing it.
        Point a = iface.a, b = iface.b;
        double dx = b.x - a.x, dy = b.y - a.y;
        if (std::hypot(dx, dy) <= geo_tol) {
          errs.push_back(fmt::format("line {}: interface segment has zero length", s->line));
          continue;
        }
        if (inside_open(a) || inside_open(b)) {
          errs.push_back(fmt::format(
              "line {}: interface endpoints must lie on or outside the domain boundary",
              s->line));
          continue;
        }
        // Clip the chord to the domain; its midpoint must sit in the open
        // interior (rejects boundary-collinear and non-crossing segments).
        double t0 = 0.0, t1 = 1.0;
        auto clip1 = [&](double p, double q) {  // keep p*t <= q
          if (p == 0.0) return q >= 0.0;
          double ratio = q / p;
          if (p < 0.0) {
            if (ratio > t1) return false;
            if (ratio > t0) t0 = ratio;
          } else {
            if (ratio < t0) return false;
            if (ratio < t1) t1 = ratio;
          }
          return true;
        };
        bool crosses = clip1(-dx, a.x - cfg.domain.x0) && clip1(dx, cfg.domain.x1 - a.x) &&
                       clip1(-dy, a.y - cfg.domain.y0) && clip1(dy, cfg.domain.y1 - a.y);
        double tm = (t0 + t1) / 2;
        Point mid{a.x + tm * dx, a.y + tm * dy};
        if (!crosses || !inside_open(mid)) {
          errs.push_back(fmt::format(
              "line {}: interface segment does not cross the domain interior", s->line));
          continue;
        }
      }
    }
    cfg.post.interfaces.push_back(iface);
  }

  for (Sec* s : get_all("post.line")) {
    SecReader r(*s, errs);
    std::optional<std::string> id = r.str("id", true);
    std::optional<std::vector<Point>> seg = r.points("segment", 2, true);
    std::optional<std::string> field = r.str("field");
    std::optional<int> count = r.integer("count");
    r.finish();
    if (!id || !seg) continue;
    if (!safe_id(*id)) {
      errs.push_back(
          fmt::format("line {}: line id '{}' must match [A-Za-z0-9_.-]+", s->line, *id));
      continue;
    }
    for (const RunConfig::SampleLine& other : cfg.post.lines)
      if (other.id == *id)
        errs.push_back(fmt::format("line {}: duplicate line id '{}'", s->line, *id));
    RunConfig::SampleLine ln;
    ln.id = *id;
    ln.a = (*seg)[0];
    ln.b = (*seg)[1];
    ln.count = count.value_or(200);
    if (ln.count < 2) {
      errs.push_back(fmt::format("line {}: sample count must be >= 2", s->line));
      continue;
    }
    if (field) {
      if (*field == "concentration")
        ln.concentration = true;
      else if (*field != "pressure") {
        errs.push_back(fmt::format(
            "line {}: field must be pressure or concentration; got '{}'", s->line, *field));
        continue;
      }
    }
    if (ln.concentration && !cfg.transport.enabled) {
      errs.push_back(fmt::format(
          "line {}: concentration sample line needs enabled transport", s->line));
      continue;
    }
    if (domain_ok && !(in_domain(ln.a) && in_domain(ln.b))) {
      errs.push_back(
          fmt::format("line {}: sample line endpoints must lie inside the domain", s->line));
      continue;
    }
    if (std::hypot(ln.b.x - ln.a.x, ln.b.y - ln.a.y) <= geo_tol) {
      errs.push_back(fmt::format("line {}: sample line has zero length", s->line));
      continue;
    }
    cfg.post.lines.push_back(ln);
  }

  // ---- [output] -------------------------------------------------------------------
  if (Sec* s = get_single("output")) {
    SecReader r(*s, errs);
    if (std::optional<std::string> dir = r.str("directory")) {
      if (dir->empty())
        errs.push_back(fmt::format("line {}: output directory must be non-empty", s->line));
      else
        cfg.out_dir = *dir;
    }
    r.finish();
  }

  return out;
}

RunConfig parse_config_or_throw(const std::string& text) {
  ParseResult res = parse_config(text);
  if (!res.ok()) throw ConfigError(std::move(res.errors));
  return std::move(res.config);
}

}  // namespace fracfem
