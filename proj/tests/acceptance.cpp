// One PASS/FAIL line per acceptance criterion; exit code is the number of failures.

#include "support.hpp"

#include "quadcarve/layout_builder.hpp"
#include "quadcarve/pipeline.hpp"

#include <fmt/format.h>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace quadcarve;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const char* kFixtures[] = {"square.obj", "triangle.obj", "pentagon.obj", "lshape.obj", "annulus.obj",
                           "hemisphere.obj", "disk.obj", "notch.obj", "plate.obj", "icosahedron.off"};

struct Criterion {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

struct Prepared {
  std::string name;
  Surface surface;
  CrossField field;
  std::vector<Singularity> singularities;
  double field_seconds = 0;
};

Prepared prepare(const std::string& name) {
  const auto t0 = Clock::now();
  Prepared p{name, qt::load_fixture(name), {}, {}, 0};
  p.field = compute_cross_field(p.surface);
  p.singularities = detect_singularities(p.surface, p.field);
  p.field_seconds = since(t0);
  return p;
}

Criterion index_sum(const std::vector<Prepared>& all) {
  Criterion c;
  double worst = 0;
  for (const auto& p : all) {
    const int chi = p.surface.mesh.euler_characteristic();
    const int total = total_index_quarters(p.surface, p.field);
    if (total != 4 * chi) c.fail(fmt::format("{}: index sum {}/4, chi {}", p.name, total, chi));
    if (p.field_seconds >= 1.0) c.fail(fmt::format("{}: {:.2f}s", p.name, p.field_seconds));
    worst = std::max(worst, p.field_seconds);
  }
  if (c.ok) c.detail = fmt::format("{} fixtures, slowest {:.3f}s", all.size(), worst);
  return c;
}

Criterion singularity_counts(const std::vector<Prepared>& all) {
  Criterion c;
  for (const auto& p : all) {
    std::vector<int> ds;
    for (const auto& s : p.singularities) ds.push_back(s.d);
    std::vector<int> want;
    if (p.name == "square.obj") want = {};
    else if (p.name == "triangle.obj") want = {1};
    else if (p.name == "pentagon.obj") want = {-1};
    else continue;
    if (ds != want) c.fail(fmt::format("{}: {} singularities", p.name, ds.size()));
  }
  if (c.ok) c.detail = "square 0, triangle one +1/4, pentagon one -1/4";
  return c;
}

Criterion normalization(const std::vector<Prepared>& all) {
  Criterion c;
  double worst = 0;
  for (const auto& p : all) {
    for (int v = 0; v < p.surface.mesh.num_nodes(); ++v) {
      worst = std::max(worst, std::abs(std::abs(p.field.u[v]) - 1.0));
      if (p.surface.boundary.is_boundary[v] && p.field.u[v] != p.surface.boundary.value[v])
        c.fail(fmt::format("{}: Dirichlet node {} changed", p.name, v));
    }
  }
  if (worst >= 1e-12) c.fail(fmt::format("max ||u|-1| = {:.3g}", worst));
  if (c.ok) c.detail = fmt::format("max ||u|-1| = {:.2g}", worst);
  return c;
}

Criterion hyperbola_oracle() {
  Criterion c;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0;
  int arcs = 0;
  for (int d : {-2, -1, 1}) {
    const int P = 4 - d;
    for (int sector = 0; sector < P; ++sector) {
      const double beta = 0.3 + kTwoPi * sector / P;
      std::vector<double> As;
      for (int k = 0; k < 20; ++k) {
        const double phi0 = 0.3 + (kQuarterPi - 0.35) * unit(rng);
        const double r0 = 0.5 + 1.5 * unit(rng);
        for (double sign : {-1.0, 1.0}) {
          worst = std::max(worst, qt::hyperbola_deviation(d, beta, phi0, r0, sign));
          ++arcs;
        }
        As.push_back(0.05 + 3 * unit(rng));
      }
      std::sort(As.begin(), As.end());
      for (double phi : hyperbola_rays(64)) {
        double prev = -1;
        for (double A : As) {
          const double r = hyperbola_point(Vec2::Zero(), d, beta, A, phi).norm();
          if (!(r > prev)) c.fail(fmt::format("radial order broken, d={} phi={}", d, phi));
          prev = r;
        }
      }
    }
  }
  if (worst >= 1e-4) c.fail(fmt::format("max deviation {:.3g} r0", worst));
  if (c.ok) c.detail = fmt::format("{} arcs, max deviation {:.2g} r0", arcs, worst);
  return c;
}

Criterion regular_tracing() {
  Criterion c;
  const Surface sq = qt::load_fixture("square.obj");
  double straight = 0;
  for (double a : {0.0, kPi / 8, 0.3, -1.0}) straight = std::max(straight, qt::straight_line_deviation(sq, a, {0.3, 0.41, 0}));
  const double drift = qt::circular_drift(qt::load_fixture("annulus.obj"));
  if (straight >= 1e-12) c.fail(fmt::format("straight-line deviation {:.3g}", straight));
  if (drift >= 1e-3) c.fail(fmt::format("radius drift {:.3g}", drift));
  if (c.ok) c.detail = fmt::format("line deviation {:.2g}, drift per revolution {:.2g}", straight, drift);
  return c;
}

Criterion simplification_invariants(const std::vector<Prepared>& all) {
  Criterion c;
  int collapses = 0;
  auto check = [&](const std::string& what, const TLayout& initial) {
    SimplifyConfig cfg;
    cfg.keep_snapshots = true;
    const SimplifyResult r = simplify(initial, cfg);
    if (static_cast<int>(r.log.size()) > initial.num_components())
      c.fail(fmt::format("{}: {} collapses", what, r.log.size()));
    const TLayout* prev = &initial;
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
      const std::string v = qt::collapse_violation(*prev, r.snapshots[k]);
      if (!v.empty()) c.fail(fmt::format("{} step {}: {}", what, k, v));
      prev = &r.snapshots[k];
    }
    collapses += static_cast<int>(r.log.size());
  };
  for (const auto& p : all) {
    const auto tr = trace_separatrices(p.surface, p.field, p.singularities);
    check(p.name, layout_from_separatrices(p.surface, p.singularities, tr));
  }
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const TLayout l = qt::guillotine_layout(rng, std::uniform_int_distribution<int>(1, 14)(rng));
    if (!l.valid()) c.fail(fmt::format("synthetic layout {} invalid", trial));
    check(fmt::format("synthetic {}", trial), l);
  }
  if (c.ok) c.detail = fmt::format("{} fixtures + 200 synthetic layouts, {} collapses checked", all.size(), collapses);
  return c;
}

Criterion energy_gate() {
  Criterion c;
  auto zip = [](const TLayout& l, Patch* out) -> std::optional<Chord> {
    for (const auto& ch : enumerate_chords(l))
      for (const auto& p : enumerate_patches(ch, l))
        if (p.kind == PatchKind::Zip) {
          *out = p;
          return ch;
        }
    return std::nullopt;
  };
  {
    const TLayout l = qt::lens_layout(2.0);  // w = l = 2
    Patch p;
    const auto ch = zip(l, &p);
    if (!ch) c.fail("no zip patch in the w = l layout");
    else if (chord_energy(*ch, l) > 0) c.fail("w = l zip patch has positive energy");
    for (const auto& rec : simplify(l).log)
      for (PatchKind k : rec.patch_kinds)
        if (k == PatchKind::Zip) c.fail("w = l zip patch collapsed");
  }
  {
    const TLayout l = qt::lens_layout(0.2);  // w / l = 0.1
    Patch p;
    const auto ch = zip(l, &p);
    if (!ch) {
      c.fail("no zip patch in the thin layout");
    } else {
      const Collapsibility col = chord_collapsibility(*ch, l);
      if (!col.ok) c.fail("thin zip chord not collapsible: " + col.reason);
      if (!(chord_energy(*ch, l) > 0)) c.fail("thin zip chord has non-positive energy");
      const CollapseOutcome o = collapse_chord(l, *ch);
      if (!o.accepted) c.fail("thin zip collapse rejected: " + o.reason);
      else if (const auto v = qt::collapse_violation(l, o.layout); !v.empty()) c.fail(v);
    }
  }
  if (c.ok) c.detail = "w = l kept, w/l = 0.1 zipped";
  return c;
}

Criterion performance() {
  Criterion c;
  PipelineConfig cfg;
  cfg.input = qt::fixture("plate.obj");
  cfg.out_dir = std::filesystem::temp_directory_path() / "quadcarve_acceptance_perf";
  cfg.emit = EmitOptions::parse("json");
  const RunReport r = run_pipeline(cfg);
  const double total = r.time_field + r.time_tracing + r.time_simplify;
  if (r.status != RunStatus::Ok) c.fail("plate run failed: " + r.message);
  if (r.nodes < 5000) c.fail(fmt::format("plate has only {} nodes", r.nodes));
  if (total >= 5.0) c.fail(fmt::format("{:.2f}s", total));
  if (c.ok)
    c.detail = fmt::format("plate n={}: field {:.2f}s + tracing {:.2f}s + simplify {:.2f}s = {:.2f}s", r.nodes,
                           r.time_field, r.time_tracing, r.time_simplify, total);
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Criterion determinism() {
  Criterion c;
  std::string first;
  for (int run = 0; run < 2; ++run) {
    PipelineConfig cfg;
    cfg.input = qt::fixture("plate.obj");
    cfg.out_dir = std::filesystem::temp_directory_path() / fmt::format("quadcarve_acceptance_det{}", run);
    std::filesystem::remove_all(cfg.out_dir);
    cfg.emit = EmitOptions::parse("json");
    if (run_pipeline(cfg).status != RunStatus::Ok) c.fail("run failed");
    const std::string text = slurp(cfg.out_dir / "plate" / "layout.json") + slurp(cfg.out_dir / "plate" / "layout_initial.json");
    if (text.empty()) c.fail("no JSON written");
    if (run == 0) first = text;
    else if (text != first) c.fail("JSON differs between runs");
  }
  if (c.ok) c.detail = fmt::format("plate layouts identical ({} bytes)", first.size());
  return c;
}

Criterion layout_validity(const std::vector<Prepared>& all) {
  Criterion c;
  for (const auto& p : all) {
    const auto tr = trace_separatrices(p.surface, p.field, p.singularities);
    const TLayout l = layout_from_separatrices(p.surface, p.singularities, tr);
    if (!l.valid()) c.fail(p.name + ": " + l.problems().front());
    if (qt::count_quad_faces(l) != l.num_components()) c.fail(p.name + ": non-quad face");
    if (!l.euler_ok()) c.fail(p.name + ": Euler formula");
  }
  if (c.ok) c.detail = fmt::format("{} fixtures, all faces 4-sided, Euler formula holds", all.size());
  return c;
}

}  // namespace

int main() {
  std::vector<Prepared> all;
  for (const char* f : kFixtures) all.push_back(prepare(f));

  const std::pair<const char*, std::function<Criterion()>> criteria[] = {
      {"index-sum identity", [&] { return index_sum(all); }},
      {"singularity counts", [&] { return singularity_counts(all); }},
      {"field normalization", [&] { return normalization(all); }},
      {"hyperbolic tracer oracle", hyperbola_oracle},
      {"regular-triangle tracing", regular_tracing},
      {"simplification invariants", [&] { return simplification_invariants(all); }},
      {"energy gate", energy_gate},
      {"performance", performance},
      {"determinism", determinism},
      {"layout validity", [&] { return layout_validity(all); }},
  };
  int failures = 0, k = 0;
  for (const auto& [name, run] : criteria) {
    ++k;
    Criterion c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.fail(std::string("exception: ") + e.what());
    }
    failures += !c.ok;
    std::cout << fmt::format("{} {:2d} {}: {}", c.ok ? "PASS" : "FAIL", k, name, c.detail) << std::endl;
  }
  return failures;
}
