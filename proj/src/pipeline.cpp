#include "quadcarve/pipeline.hpp"

#include "quadcarve/layout_builder.hpp"
#include "quadcarve/log.hpp"

#include <fmt/format.h>

#include <chrono>
#include <sstream>

namespace quadcarve {
namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

EmitOptions EmitOptions::parse(const std::string& list) {
  EmitOptions e{false, false, false, false};
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "json") e.json = true;
    else if (item == "vtk") e.vtk = true;
    else if (item == "svg") e.svg = true;
    else if (item == "csv") e.csv = true;
    else if (!item.empty()) throw std::invalid_argument("unknown export '" + item + "' (expected json, vtk, svg, csv)");
  }
  return e;
}

void PipelineConfig::validate() const {
  if (tau && !(*tau > 0.0)) throw std::invalid_argument("--tau must be positive");
  if (!(delta_scale > 0.0)) throw std::invalid_argument("--delta-scale must be positive");
  if (!(tracer.heun_factor > 0.0)) throw std::invalid_argument("--heun-factor must be positive");
  if (tracer.rays < 1) throw std::invalid_argument("--rays must be positive");
  if (!(tracer.tangential_threshold > 0.0) || tracer.tangential_threshold >= kHalfPi)
    throw std::invalid_argument("--tangential-threshold must lie in (0, pi/2)");
  if (tracer.step_cap_factor < 1) throw std::invalid_argument("step cap factor must be positive");
}

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Ok: return "ok";
    case RunStatus::StageError: return "stage_error";
    case RunStatus::ValidationFailed: return "validation_failed";
    case RunStatus::InputError: return "input_error";
  }
  return "unknown";
}

RunReport run_pipeline(const PipelineConfig& cfg, PipelineArtifacts* artifacts) {
  PipelineArtifacts local;
  PipelineArtifacts& art = artifacts ? *artifacts : local;
  RunReport rep;
  rep.model = cfg.input.stem().string();
  const std::filesystem::path dir = cfg.out_dir / rep.model;
  std::string stage = "input";
  auto fail = [&](RunStatus s, const std::string& msg) {
    rep.status = s;
    rep.failed_stage = stage;
    rep.message = msg;
    log::error(fmt::format("{}: {} stage failed: {}", rep.model, stage, msg));
    return rep;
  };
  auto emit = [&](const std::string& name, auto&& writer) {
    const auto path = dir / name;
    writer(path);
    rep.artifacts.push_back(path);
  };

  try {
    cfg.validate();
    art.surface = Surface::prepare(load_mesh(cfg.input, cfg.format));
  } catch (const std::exception& e) {
    return fail(RunStatus::InputError, e.what());
  }
  const Surface& surface = *art.surface;
  rep.nodes = surface.mesh.num_nodes();

  try {
    stage = "field";
    auto t0 = std::chrono::steady_clock::now();
    FieldOptions fo;
    fo.tau = cfg.tau;
    fo.diffusion.delta_scale = cfg.delta_scale;
    FieldReport fr;
    art.field = compute_cross_field(surface, fo, &fr);
    art.singularities = detect_singularities(surface, art.field);
    rep.time_field = seconds_since(t0);
    rep.tau = fr.time_step.tau;
    rep.field_iterations = fr.iterations;
    rep.field_converged = fr.converged;
    rep.singularities = static_cast<int>(art.singularities.size());
    if (!fr.converged) log::warn(fmt::format("{}: diffusion stopped before convergence", rep.model));

    stage = "tracing";
    t0 = std::chrono::steady_clock::now();
    art.trace = trace_separatrices(surface, art.field, art.singularities, cfg.tracer);
    rep.separatrices = static_cast<int>(art.trace.separatrices.size());
    stage = "layout";
    art.initial = layout_from_separatrices(surface, art.singularities, art.trace);
    rep.time_tracing = seconds_since(t0);
    rep.components_before = rep.components_after = art.initial.num_components();
    rep.t_junctions_before = rep.t_junctions_after = art.initial.t_junction_count();

    stage = "export";
    if (cfg.emit.csv) {
      emit("field.csv", [&](const auto& p) { write_field_csv(p, surface, art.field); });
      emit("singularities.csv", [&](const auto& p) { write_singularities_csv(p, art.singularities); });
    }
    if (cfg.emit.vtk) emit("separatrices.vtk", [&](const auto& p) { write_vtk(p, art.trace.separatrices); });
    if (cfg.emit.json)
      emit("layout_initial.json", [&](const auto& p) { write_layout_json(p, art.initial, art.singularities); });

    if (!art.initial.valid()) {
      stage = "layout";
      std::string msg = "initial layout is not a valid T-layout";
      for (const auto& p : art.initial.problems()) msg += "; " + p;
      return fail(RunStatus::ValidationFailed, msg);
    }

    stage = "simplify";
    t0 = std::chrono::steady_clock::now();
    art.simplified = simplify(art.initial, cfg.simplify);
    rep.time_simplify = seconds_since(t0);
    const TLayout& fin = art.simplified.layout;
    rep.components_after = fin.num_components();
    rep.t_junctions_after = fin.t_junction_count();
    rep.collapses = static_cast<int>(art.simplified.log.size());
    if (!fin.valid()) return fail(RunStatus::ValidationFailed, "simplified layout is invalid");

    stage = "export";
    if (cfg.emit.json) {
      emit("layout.json", [&](const auto& p) { write_layout_json(p, fin, art.singularities); });
      emit("collapse_log.jsonl", [&](const auto& p) { write_collapse_log(p, art.simplified.log); });
    }
    if (cfg.emit.vtk) {
      emit("layout_initial.vtk", [&](const auto& p) { write_vtk(p, art.initial); });
      emit("layout.vtk", [&](const auto& p) { write_vtk(p, fin); });
    }
    if (cfg.emit.svg) {
      try {
        emit("layout_initial.svg", [&](const auto& p) { write_svg(p, art.initial, art.singularities); });
        emit("layout.svg", [&](const auto& p) { write_svg(p, fin, art.singularities); });
      } catch (const ExportError& e) {
        log::warn(fmt::format("{}: {}", rep.model, e.what()));
      }
    }
    if (cfg.emit.csv) emit("report.csv", [&](const auto& p) { write_report_csv(p, {rep}); });
  } catch (const FieldError& e) {
    return fail(RunStatus::StageError, e.what());
  } catch (const LayoutError& e) {
    return fail(RunStatus::ValidationFailed, e.what());
  } catch (const std::exception& e) {
    return fail(RunStatus::StageError, e.what());
  }
  log::info(fmt::format("{}: components {} -> {}, T-junctions {} -> {}, {} collapses", rep.model,
                        rep.components_before, rep.components_after, rep.t_junctions_before, rep.t_junctions_after,
                        rep.collapses));
  return rep;
}

std::string report_csv(const std::vector<RunReport>& reports) {
  std::string out =
      "model,n,field_s,tracing_s,simplify_s,components_before,components_after,t_junctions_before,"
      "t_junctions_after,chord_collapses,singularities,status\n";
  for (const auto& r : reports)
    out += fmt::format("{},{},{:.4f},{:.4f},{:.4f},{},{},{},{},{},{},{}\n", r.model, r.nodes, r.time_field,
                       r.time_tracing, r.time_simplify, r.components_before, r.components_after,
                       r.t_junctions_before, r.t_junctions_after, r.collapses, r.singularities, to_string(r.status));
  return out;
}

void write_report_csv(const std::filesystem::path& path, const std::vector<RunReport>& reports) {
  write_text(path, report_csv(reports));
}

}  // namespace quadcarve
