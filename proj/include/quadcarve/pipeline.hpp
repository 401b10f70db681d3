#pragma once

#include "quadcarve/exporters.hpp"
#include "quadcarve/mesh_io.hpp"

#include <filesystem>
#include <optional>

namespace quadcarve {

struct EmitOptions {
  bool json = true;
  bool vtk = false;
  bool svg = false;
  bool csv = false;

  // Comma separated subset of json,vtk,svg,csv.
  static EmitOptions parse(const std::string& list);
};

struct PipelineConfig {
  std::filesystem::path input;
  MeshFormat format = MeshFormat::Auto;
  std::optional<double> tau;
  double delta_scale = 1e-6;
  TracerOptions tracer;
  SimplifyConfig simplify;
  std::filesystem::path out_dir = "out";
  EmitOptions emit;

  // Throws std::invalid_argument naming the offending parameter.
  void validate() const;
};

enum class RunStatus { Ok = 0, StageError = 1, ValidationFailed = 2, InputError = 3 };
const char* to_string(RunStatus s);

struct RunReport {
  std::string model;
  int nodes = 0;
  int singularities = 0;
  double tau = 0.0;
  int field_iterations = 0;
  bool field_converged = false;
  double time_field = 0.0;
  double time_tracing = 0.0;
  double time_simplify = 0.0;
  int separatrices = 0;
  int components_before = 0;
  int components_after = 0;
  int t_junctions_before = 0;
  int t_junctions_after = 0;
  int collapses = 0;
  RunStatus status = RunStatus::Ok;
  std::string failed_stage;  // "input", "field", "tracing", "layout", "simplify", "export"
  std::string message;
  std::vector<std::filesystem::path> artifacts;
};

// Everything produced by a run, for callers that want more than the report.
struct PipelineArtifacts {
  std::optional<Surface> surface;
  CrossField field;
  std::vector<Singularity> singularities;
  TraceResult trace;
  TLayout initial;
  SimplifyResult simplified;
};

// Field, tracing and simplification on one mesh. Writes the enabled exports to
// out_dir/<mesh stem>/; stage failures are reported, never thrown.
RunReport run_pipeline(const PipelineConfig& config, PipelineArtifacts* artifacts = nullptr);

std::string report_csv(const std::vector<RunReport>& reports);
void write_report_csv(const std::filesystem::path& path, const std::vector<RunReport>& reports);

}  // namespace quadcarve
