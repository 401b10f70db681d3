#pragma once

#include "quadcarve/simplifier.hpp"
#include "quadcarve/tracer.hpp"

#include <filesystem>
#include <string>

namespace quadcarve {

class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical layout JSON: nodes, edges, components (4 sides as edge-id lists)
// and singularities. Ordering follows the layout indices.
std::string layout_to_json(const TLayout& layout, const std::vector<Singularity>& singularities = {});
TLayout layout_from_json(const std::string& text);
void write_layout_json(const std::filesystem::path& path, const TLayout& layout,
                       const std::vector<Singularity>& singularities = {});
TLayout read_layout_json(const std::filesystem::path& path);

// Legacy VTK polydata with one polyline cell per entry.
std::string vtk_polylines(const std::vector<std::vector<Vec3>>& polylines, const std::string& title = "quadcarve");
void write_vtk(const std::filesystem::path& path, const TLayout& layout);
void write_vtk(const std::filesystem::path& path, const std::vector<Separatrix>& separatrices);

// Top view of a planar layout. Throws ExportError when the geometry is not
// planar within 1e-6 of its diameter.
std::string layout_svg(const TLayout& layout, const std::vector<Singularity>& singularities = {});
void write_svg(const std::filesystem::path& path, const TLayout& layout,
               const std::vector<Singularity>& singularities = {});

void write_field_csv(const std::filesystem::path& path, const Surface& surface, const CrossField& field);
void write_singularities_csv(const std::filesystem::path& path, const std::vector<Singularity>& singularities);
std::string collapse_log_jsonl(const std::vector<CollapseRecord>& log);
void write_collapse_log(const std::filesystem::path& path, const std::vector<CollapseRecord>& log);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace quadcarve
