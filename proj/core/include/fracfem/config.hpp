// Strict, versioned run configuration.
//
// Format ("fracfem-config/1"): line-oriented key-value tree. The first
// non-blank, non-comment line must be the literal version tag
// `fracfem-config/1`. After it, `[section]` headers group `key = value`
// pairs; `#` starts a comment (whole line or trailing); blank lines are
// ignored. Unknown sections or keys are errors, repeated scalar sections
// are errors, and validation reports every problem found, not just the
// first.
//
// Sections (singleton unless marked repeatable):
//   [domain]        x0 y0 x1 y1                       (required)
//   [materials]     matrix_k matrix_phi fracture_k fracture_phi
//   [fracture]*     segment="xa,ya xb,yb" aperture=.. |
//                   center="x,y" half_length=.. half_aperture=.. angle=..
//                   | corners="x,y x,y x,y x,y"
//   [region]*       box="x0,y0 x1,y1" k=.. phi=..
//   [mesh]          be_x be_y amr_steps max_level |
//                   nodes_csv=.. cells_csv=..       (required)
//   [flow]          stabilize ir_passes
//   [flow.bc]*      side=west|east|south|north lo hi
//                   type=dirichlet|neumann value
//   [transport]     enabled dt t_final initial_value
//                   limiter=zalesak|none|unity ir_passes snapshots="t t.."
//   [transport.bc]* side lo hi value                  (prescribed c)
//   [post.interface]* id  segment="x,y x,y" | skeleton=true
//   [post.line]*    id segment field=pressure|concentration count
//   [output]        directory
//
// Omitted `lo`/`hi` on a bc segment default to the full side extent.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracfem/flow.hpp"
#include "fracfem/transport.hpp"

namespace fracfem {

struct RunConfig {
  std::string hash_hex;  // fnv1a64 of the raw config text, 16 hex digits

  Box domain;
  MaterialField materials;  // fractures and region overrides included

  struct MeshCfg {
    bool imported = false;
    int be_x = 0, be_y = 0;
    int amr_steps = 0;
    int max_level = 12;
    std::string nodes_csv, cells_csv;
  } mesh;

  struct FlowCfg {
    std::vector<BCSegment> bcs;
    bool stabilize = true;
    int ir_passes = 3;
  } flow;

  struct TransportCfg {
    bool enabled = false;
    double dt = 0.0;
    double t_final = 0.0;
    double initial_value = 0.0;
    LimiterMode limiter = LimiterMode::zalesak;
    int ir_passes = 2;
    std::vector<BCSegment> bcs;  // dirichlet; value = prescribed concentration
    std::vector<double> snapshot_times;
  } transport;

  struct Interface {
    std::string id;
    bool skeleton = false;
    Point a{}, b{};  // side 1 lies left of a->b
  };
  struct SampleLine {
    std::string id;
    Point a{}, b{};
    int count = 200;
    bool concentration = false;  // otherwise pressure
  };
  struct PostCfg {
    std::vector<Interface> interfaces;
    std::vector<SampleLine> lines;
  } post;

  std::string out_dir = "out";
};

// Carries every validation error, "line N: ..." prefixed where known.
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> errs);
  std::vector<std::string> errors;
};

struct ParseResult {
  RunConfig config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

// Collects all syntax and validation errors.
ParseResult parse_config(const std::string& text);

// parse_config, throwing ConfigError when anything is wrong.
RunConfig parse_config_or_throw(const std::string& text);

// Whole-file read; throws std::runtime_error when unreadable.
std::string read_text_file(const std::string& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string hash_hex(std::uint64_t h);

}  // namespace fracfem
