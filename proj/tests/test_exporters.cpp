#include "support.hpp"

#include "quadcarve/exporters.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

using namespace quadcarve;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("quadcarve_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::vector<std::string> lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Json, RoundTrip) {
  const TLayout l = qt::lens_layout(0.3);
  const std::string text = layout_to_json(l);
  const TLayout back = layout_from_json(text);
  EXPECT_EQ(back.num_nodes(), l.num_nodes());
  EXPECT_EQ(back.num_edges(), l.num_edges());
  EXPECT_EQ(back.num_components(), l.num_components());
  EXPECT_EQ(back.singularity_multiset(), l.singularity_multiset());
  EXPECT_TRUE(back.valid());
  EXPECT_EQ(layout_to_json(back), text);
}

TEST(Json, Schema) {
  const TLayout l = qt::grid_layout({0, 1, 2}, {0, 1});
  const auto j = nlohmann::json::parse(layout_to_json(l));
  EXPECT_EQ(j.at("euler_characteristic"), 1);
  EXPECT_EQ(j.at("nodes").size(), static_cast<std::size_t>(l.num_nodes()));
  ASSERT_EQ(j.at("components").size(), 2u);
  for (const auto& c : j.at("components")) {
    EXPECT_EQ(c.at("sides").size(), 4u);
    EXPECT_EQ(c.at("corners").size(), 4u);
  }
  for (const auto& n : j.at("nodes")) EXPECT_EQ(n.at("xyz").size(), 3u);
}

TEST(Json, MalformedInput) {
  EXPECT_THROW(layout_from_json("{"), ExportError);
  EXPECT_THROW(layout_from_json("{\"nodes\": []}"), ExportError);
  EXPECT_THROW(layout_from_json(R"({"nodes":[],"edges":[{"nodes":[0,1],"polyline":[],"parent":0,"boundary":false}],
                                    "euler_characteristic":1,"boundary_loops":1})"),
               ExportError);
}

TEST(Json, FileRoundTrip) {
  const auto dir = temp_dir("json");
  const TLayout l = qt::grid_layout({0, 1, 2}, {0, 1, 2});
  write_layout_json(dir / "a" / "layout.json", l);
  EXPECT_EQ(read_layout_json(dir / "a" / "layout.json").num_components(), 4);
  EXPECT_THROW(read_layout_json(dir / "missing.json"), ExportError);
}

TEST(Vtk, Counts) {
  const TLayout l = qt::grid_layout({0, 1, 2}, {0, 1});
  std::size_t pts = 0;
  for (const auto& e : l.edges()) pts += e.polyline.size();
  const std::string v = vtk_polylines([&] {
    std::vector<std::vector<Vec3>> p;
    for (const auto& e : l.edges()) p.push_back(e.polyline);
    return p;
  }());
  EXPECT_NE(v.find("POINTS " + std::to_string(pts) + " double"), std::string::npos);
  EXPECT_NE(v.find("LINES " + std::to_string(l.num_edges()) + " " + std::to_string(pts + l.num_edges())),
            std::string::npos);
  const auto dir = temp_dir("vtk");
  write_vtk(dir / "layout.vtk", l);
  const auto ls = lines(dir / "layout.vtk");
  EXPECT_EQ(ls[0], "# vtk DataFile Version 3.0");
  EXPECT_EQ(ls.size(), 5 + pts + 1 + l.num_edges());
}

TEST(Svg, PlanarOnly) {
  const TLayout l = qt::lens_layout(0.3);
  const std::string svg = layout_svg(l);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  std::size_t markers = 0;
  for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++markers;
  EXPECT_EQ(markers, 2u);

  std::vector<LayoutNode> nodes = l.nodes();
  std::vector<LayoutEdge> edges = l.edges();
  for (auto& e : edges)
    for (auto& p : e.polyline) p.z() = 0.1 * p.x();
  const TLayout tilted(nodes, edges, 1, 1);
  EXPECT_THROW(layout_svg(tilted), ExportError);
}

TEST(Csv, FieldAndSingularities) {
  const Surface s = qt::load_fixture("triangle.obj");
  const CrossField f = compute_cross_field(s);
  const auto sings = detect_singularities(s, f);
  const auto dir = temp_dir("csv");
  write_field_csv(dir / "field.csv", s, f);
  write_singularities_csv(dir / "sing.csv", sings);
  const auto fl = lines(dir / "field.csv");
  EXPECT_EQ(fl.size(), static_cast<std::size_t>(s.mesh.num_nodes()) + 1);
  EXPECT_EQ(fl[0], "node,x,y,z,u_re,u_im,theta,dx,dy,dz");
  const auto sl = lines(dir / "sing.csv");
  ASSERT_EQ(sl.size(), 2u);
  EXPECT_NE(sl[1].find(",0.25,1,"), std::string::npos);
}

TEST(CollapseLog, OneJsonObjectPerLine) {
  const TLayout l = qt::grid_layout({0, 1, 2, 3}, {0, 1.45, 1.55, 3});
  const SimplifyResult r = simplify(l);
  const std::string text = collapse_log_jsonl(r.log);
  std::istringstream in(text);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line); ++n) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_EQ(j.at("step"), static_cast<int>(n));
    EXPECT_GT(j.at("components_removed").get<int>(), 0);
  }
  EXPECT_EQ(n, r.log.size());
}
