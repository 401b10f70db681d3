#pragma once

#include "quadcarve/tlayout.hpp"

#include <optional>

namespace quadcarve {

struct Collapsibility {
  bool ok = true;
  int condition = 0;  // first violated condition (1, 2, 3), or 0
  std::string reason;
};

Collapsibility patch_collapsibility(const Chord& chord, const Patch& patch, const TLayout& layout);
// All patches collapsible, chord not cyclic.
Collapsibility chord_collapsibility(const Chord& chord, const TLayout& layout);

// Zip: pi/8 - atan(w / l) with w the mean rung length and l the mean length of
// the two longitudinal sides of the patch; non-zip: 1. l = 0 gives -inf.
double patch_energy(const Chord& chord, const Patch& patch, const TLayout& layout);
double chord_energy(const Chord& chord, const TLayout& layout);

struct ZipCurve {
  int start_node = -1;
  int end_node = -1;
  std::vector<Vec3> polyline;
  std::vector<int> rungs;          // interior rungs crossed, in order
  std::vector<Vec3> rung_points;   // where the curve meets them
  std::vector<double> rung_params;  // normalized curve parameter of each rung point
  int parent = -1;
};

struct CollapsePlan {
  int chord = -1;
  std::vector<PatchKind> kinds;
  std::vector<double> energies;
  std::vector<int> deleted_edges;
  std::vector<ZipCurve> zips;
};

// Geometry and edge set of a collapse. Fails with a reason when a side that
// must go is a boundary side.
std::optional<CollapsePlan> plan_collapse(const Chord& chord, const TLayout& layout, std::string* reason = nullptr);

struct CollapseOutcome {
  bool accepted = false;
  std::string reason;
  TLayout layout;  // the collapsed layout when accepted
};

// Applies the plan, extends hanging separatrices and revalidates. The input is
// never modified; rejected collapses return the reason.
CollapseOutcome collapse_chord(const TLayout& layout, const Chord& chord);

enum class CollapseOrder { Thinnest, Energy };
const char* to_string(CollapseOrder o);

struct SimplifyConfig {
  CollapseOrder order = CollapseOrder::Thinnest;
  int max_collapses = -1;  // negative: unlimited
  bool keep_snapshots = false;
};

struct CollapseRecord {
  int step = 0;
  int chord = -1;
  double min_width = 0.0;
  double energy = 0.0;
  std::vector<PatchKind> patch_kinds;
  int components_before = 0;
  int components_after = 0;
  int t_junctions_before = 0;
  int t_junctions_after = 0;
};

struct SimplifyResult {
  TLayout layout;
  std::vector<CollapseRecord> log;
  int rejected = 0;  // rolled back attempts
  std::vector<TLayout> snapshots;  // layout after each collapse, when requested
};

SimplifyResult simplify(const TLayout& layout, const SimplifyConfig& config = {});

}  // namespace quadcarve
