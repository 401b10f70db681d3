#include "quadcarve/exporters.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace quadcarve {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }
Vec3 vec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ExportError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ExportError("cannot write " + path.string());
  out << text;
  if (!out) throw ExportError("write failed for " + path.string());
}

// ---- JSON ------------------------------------------------------------------

std::string layout_to_json(const TLayout& l, const std::vector<Singularity>& sings) {
  json j;
  j["euler_characteristic"] = l.euler_characteristic();
  j["boundary_loops"] = l.boundary_loops();
  json nodes = json::array();
  for (int v = 0; v < l.num_nodes(); ++v) {
    const LayoutNode& n = l.node(v);
    nodes.push_back({{"id", v},
                     {"kind", to_string(n.kind)},
                     {"xyz", vec(n.position)},
                     {"normal", vec(n.normal)},
                     {"index_quarters", n.index_quarters},
                     {"singularity", n.singularity},
                     {"on_boundary", n.on_boundary}});
  }
  j["nodes"] = std::move(nodes);
  json edges = json::array();
  for (int e = 0; e < l.num_edges(); ++e) {
    const LayoutEdge& x = l.edge(e);
    json poly = json::array();
    for (const Vec3& p : x.polyline) poly.push_back(vec(p));
    edges.push_back({{"id", e},
                     {"nodes", {x.nodes[0], x.nodes[1]}},
                     {"polyline", std::move(poly)},
                     {"parent", x.parent},
                     {"boundary", x.boundary}});
  }
  j["edges"] = std::move(edges);
  json comps = json::array();
  for (int c = 0; c < l.num_components(); ++c) {
    const Component& comp = l.components()[c];
    json sides = json::array();
    for (const auto& side : comp.sides) {
      json ids = json::array();
      for (int h : side) ids.push_back(h / 2);
      sides.push_back(std::move(ids));
    }
    comps.push_back({{"id", c},
                     {"sides", std::move(sides)},
                     {"corners", {comp.corners[0], comp.corners[1], comp.corners[2], comp.corners[3]}}});
  }
  j["components"] = std::move(comps);
  json sj = json::array();
  for (const Singularity& s : sings) {
    json ports = json::array();
    for (int k = 0; k < s.num_ports(); ++k) ports.push_back(vec(s.port_direction(k)));
    sj.push_back({{"id", s.id},
                  {"index", s.d / 4.0},
                  {"index_quarters", s.d},
                  {"triangle", s.triangle},
                  {"xyz", vec(s.location)},
                  {"ports", std::move(ports)}});
  }
  j["singularities"] = std::move(sj);
  return j.dump(1) + "\n";
}

TLayout layout_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    std::vector<LayoutNode> nodes;
    for (const auto& n : j.at("nodes")) {
      LayoutNode x;
      x.kind = node_kind_from_string(n.at("kind").get<std::string>());
      x.position = vec(n.at("xyz"));
      x.normal = vec(n.at("normal"));
      x.index_quarters = n.at("index_quarters").get<int>();
      x.singularity = n.at("singularity").get<int>();
      x.on_boundary = n.at("on_boundary").get<bool>();
      nodes.push_back(x);
    }
    std::vector<LayoutEdge> edges;
    for (const auto& e : j.at("edges")) {
      LayoutEdge x;
      x.nodes = {e.at("nodes").at(0).get<int>(), e.at("nodes").at(1).get<int>()};
      for (const auto& p : e.at("polyline")) x.polyline.push_back(vec(p));
      x.parent = e.at("parent").get<int>();
      x.boundary = e.at("boundary").get<bool>();
      if (x.nodes[0] < 0 || x.nodes[1] < 0 || x.nodes[0] >= static_cast<int>(nodes.size()) ||
          x.nodes[1] >= static_cast<int>(nodes.size()) || x.polyline.size() < 2)
        throw ExportError(fmt::format("malformed edge {}", edges.size()));
      edges.push_back(std::move(x));
    }
    return TLayout(std::move(nodes), std::move(edges), j.at("euler_characteristic").get<int>(),
                   j.at("boundary_loops").get<int>());
  } catch (const json::exception& e) {
    throw ExportError(std::string("layout JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ExportError(std::string("layout JSON: ") + e.what());
  }
}

void write_layout_json(const std::filesystem::path& path, const TLayout& l, const std::vector<Singularity>& s) {
  write_text(path, layout_to_json(l, s));
}

TLayout read_layout_json(const std::filesystem::path& path) { return layout_from_json(read_text(path)); }

// ---- VTK -------------------------------------------------------------------

std::string vtk_polylines(const std::vector<std::vector<Vec3>>& polylines, const std::string& title) {
  std::size_t npts = 0;
  for (const auto& p : polylines) npts += p.size();
  std::string out = fmt::format("# vtk DataFile Version 3.0\n{}\nASCII\nDATASET POLYDATA\nPOINTS {} double\n", title, npts);
  for (const auto& p : polylines)
    for (const Vec3& x : p) out += fmt::format("{:.17g} {:.17g} {:.17g}\n", x.x(), x.y(), x.z());
  out += fmt::format("LINES {} {}\n", polylines.size(), npts + polylines.size());
  std::size_t base = 0;
  for (const auto& p : polylines) {
    out += std::to_string(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) out += " " + std::to_string(base + k);
    out += "\n";
    base += p.size();
  }
  return out;
}

void write_vtk(const std::filesystem::path& path, const TLayout& l) {
  std::vector<std::vector<Vec3>> polys;
  for (const auto& e : l.edges()) polys.push_back(e.polyline);
  write_text(path, vtk_polylines(polys, "quadcarve layout"));
}

void write_vtk(const std::filesystem::path& path, const std::vector<Separatrix>& seps) {
  std::vector<std::vector<Vec3>> polys;
  for (const auto& s : seps) {
    std::vector<Vec3> p;
    for (const auto& x : s.points) p.push_back(x.position);
    polys.push_back(std::move(p));
  }
  write_text(path, vtk_polylines(polys, "quadcarve separatrices"));
}

// ---- SVG -------------------------------------------------------------------

std::string layout_svg(const TLayout& l, const std::vector<Singularity>& sings) {
  Eigen::AlignedBox3d box;
  for (const auto& e : l.edges())
    for (const Vec3& p : e.polyline) box.extend(p);
  for (const auto& n : l.nodes()) box.extend(n.position);
  if (box.isEmpty()) box.extend(Vec3::Zero());
  const double diam = std::max(box.diagonal().norm(), 1e-300);
  const double zbar = 0.5 * (box.min().z() + box.max().z());
  if (box.max().z() - zbar >= 1e-6 * diam || zbar - box.min().z() >= 1e-6 * diam)
    throw ExportError("SVG export needs a planar surface in the xy-plane; use the VTK export instead");

  const double w = 800.0;
  const double span = std::max({box.max().x() - box.min().x(), box.max().y() - box.min().y(), 1e-300});
  const double scale = w / span;
  const double h = (box.max().y() - box.min().y()) * scale;
  auto px = [&](const Vec3& p) {
    return fmt::format("{:.3f},{:.3f}", 20 + (p.x() - box.min().x()) * scale, 20 + (box.max().y() - p.y()) * scale);
  };
  std::string out = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
      w + 40, h + 40, w + 40, h + 40);
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int pass = 0; pass < 2; ++pass) {
    const bool boundary = pass == 0;
    out += fmt::format("<g class=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\">\n",
                       boundary ? "boundary" : "separatrices", boundary ? "black" : "#444", boundary ? 2 : 1);
    for (const auto& e : l.edges()) {
      if (e.boundary != boundary) continue;
      std::string d;
      for (std::size_t k = 0; k < e.polyline.size(); ++k) d += (k ? " L" : "M") + px(e.polyline[k]);
      out += fmt::format("<path d=\"{}\"/>\n", d);
    }
    out += "</g>\n";
  }
  out += "<g class=\"singularities\">\n";
  auto marker = [&](const Vec3& p, int d) {
    const std::string xy = px(p);
    const auto comma = xy.find(',');
    out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"5\" fill=\"{}\"/>\n", xy.substr(0, comma), xy.substr(comma + 1),
                       d > 0 ? "blue" : "red");
  };
  if (!sings.empty()) {
    for (const auto& s : sings) marker(s.location, s.d);
  } else {
    for (const auto& n : l.nodes())
      if (n.kind == NodeKind::Singularity) marker(n.position, n.index_quarters);
  }
  out += "</g>\n</svg>\n";
  return out;
}

void write_svg(const std::filesystem::path& path, const TLayout& l, const std::vector<Singularity>& s) {
  write_text(path, layout_svg(l, s));
}

// ---- CSV / JSONL -----------------------------------------------------------

void write_field_csv(const std::filesystem::path& path, const Surface& s, const CrossField& f) {
  std::string out = "node,x,y,z,u_re,u_im,theta,dx,dy,dz\n";
  for (int v = 0; v < s.mesh.num_nodes(); ++v) {
    const Vec3& p = s.mesh.position(v);
    const Vec3 d = s.frames.direction(v, f.theta(v));
    out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", v, p.x(), p.y(),
                       p.z(), f.u[v].real(), f.u[v].imag(), f.theta(v), d.x(), d.y(), d.z());
  }
  write_text(path, out);
}

void write_singularities_csv(const std::filesystem::path& path, const std::vector<Singularity>& sings) {
  std::string out = "id,triangle,index,index_quarters,x,y,z,ports\n";
  for (const auto& s : sings)
    out += fmt::format("{},{},{},{},{:.17g},{:.17g},{:.17g},{}\n", s.id, s.triangle, s.d / 4.0, s.d, s.location.x(),
                       s.location.y(), s.location.z(), s.num_ports());
  write_text(path, out);
}

std::string collapse_log_jsonl(const std::vector<CollapseRecord>& log) {
  std::string out;
  for (const auto& r : log) {
    json kinds = json::array();
    for (PatchKind k : r.patch_kinds) kinds.push_back(k == PatchKind::Zip ? "zip" : "non_zip");
    json j = {{"step", r.step},
              {"chord", r.chord},
              {"min_width", r.min_width},
              {"energy", r.energy},
              {"patch_kinds", std::move(kinds)},
              {"components_before", r.components_before},
              {"components_after", r.components_after},
              {"components_removed", r.components_before - r.components_after},
              {"t_junctions_before", r.t_junctions_before},
              {"t_junctions_after", r.t_junctions_after}};
    out += j.dump() + "\n";
  }
  return out;
}

void write_collapse_log(const std::filesystem::path& path, const std::vector<CollapseRecord>& log) {
  write_text(path, collapse_log_jsonl(log));
}

}  // namespace quadcarve
