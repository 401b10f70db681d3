#include "quadcarve/log.hpp"
#include "quadcarve/pipeline.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <iostream>
#include <thread>

namespace fs = std::filesystem;
using namespace quadcarve;

namespace {

void print_report(const RunReport& r) {
  std::cout << fmt::format("{}: n={} singularities={} components {} -> {}, T-junctions {} -> {}, collapses {}\n",
                           r.model, r.nodes, r.singularities, r.components_before, r.components_after,
                           r.t_junctions_before, r.t_junctions_after, r.collapses);
  std::cout << fmt::format("  field {:.3f}s, tracing {:.3f}s, simplify {:.3f}s, status {}\n", r.time_field,
                           r.time_tracing, r.time_simplify, to_string(r.status));
  if (!r.message.empty()) std::cout << "  " << r.failed_stage << ": " << r.message << "\n";
}

int run_batch(const fs::path& dir, PipelineConfig base, unsigned jobs) {
  std::vector<fs::path> meshes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".obj" || ext == ".off" || ext == ".OBJ" || ext == ".OFF"))
      meshes.push_back(entry.path());
  }
  std::sort(meshes.begin(), meshes.end());
  std::vector<RunReport> reports(meshes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < meshes.size(); i = next++) {
      PipelineConfig cfg = base;
      cfg.input = meshes[i];
      reports[i] = run_pipeline(cfg);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 0; k < std::max(1u, std::min<unsigned>(jobs, meshes.size())); ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  int code = 0;
  for (const auto& r : reports) {
    print_report(r);
    code = std::max(code, static_cast<int>(r.status));
  }
  write_report_csv(base.out_dir / "report.csv", reports);
  std::cout << "wrote " << (base.out_dir / "report.csv").string() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadcarve: cross fields, separatrix tracing and T-layout simplification"};
  app.require_subcommand(1);

  PipelineConfig cfg;
  std::string mesh, order = "thinnest", emit = "json";
  double tau = 0.0;
  std::vector<CLI::Option*> tau_opts;
  auto add_common = [&](CLI::App* sub) {
    tau_opts.push_back(sub->add_option("--tau", tau, "Diffusion time step (default: inverse of the smallest eigenvalue)"));
    sub->add_option("--delta-scale", cfg.delta_scale, "Convergence scale delta")->capture_default_str();
    sub->add_option("--heun-factor", cfg.tracer.heun_factor, "Heun step as a fraction of the local edge length")
        ->capture_default_str();
    sub->add_option("--rays", cfg.tracer.rays, "Rays across the hyperbola quadrant in singular triangles")
        ->capture_default_str();
    sub->add_option("--tangential-threshold", cfg.tracer.tangential_threshold,
                    "Crossing angle below which a crossing is tangential (radians)")
        ->capture_default_str();
    sub->add_option("--order", order, "Collapse order")
        ->check(CLI::IsMember({"thinnest", "energy"}))
        ->capture_default_str();
    sub->add_option("--max-collapses", cfg.simplify.max_collapses, "Collapse budget (negative: unlimited)")
        ->capture_default_str();
    sub->add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--emit", emit, "Exports: comma separated subset of json,vtk,svg,csv")->capture_default_str();
  };

  CLI::App* run = app.add_subcommand("run", "Run the pipeline on one mesh");
  run->add_option("mesh", mesh, "Input mesh (OBJ or OFF)")->required()->check(CLI::ExistingFile);
  add_common(run);

  fs::path batch_dir;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  CLI::App* batch = app.add_subcommand("batch", "Run the pipeline on every mesh in a directory");
  batch->add_option("dir", batch_dir, "Directory with OBJ/OFF meshes")->required()->check(CLI::ExistingDirectory);
  batch->add_option("--jobs", jobs, "Parallel runs")->capture_default_str();
  add_common(batch);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version exit 0; every other usage problem is an input error.
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(RunStatus::InputError);
  }

  try {
    for (const CLI::Option* o : tau_opts)
      if (o->count() > 0) cfg.tau = tau;
    cfg.simplify.order = order == "energy" ? CollapseOrder::Energy : CollapseOrder::Thinnest;
    cfg.emit = EmitOptions::parse(emit);
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(RunStatus::InputError);
  }

  if (*run) {
    cfg.input = mesh;
    const RunReport r = run_pipeline(cfg);
    print_report(r);
    for (const auto& p : r.artifacts) std::cout << "  wrote " << p.string() << "\n";
    return static_cast<int>(r.status);
  }
  return run_batch(batch_dir, cfg, jobs);
}
