#include "quadcarve/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace quadcarve {
namespace {

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw MeshError(MeshError::Kind::Parse, "line " + std::to_string(line), what);
}

void add_polygon(std::vector<Triangle>& tris, const std::vector<int>& poly, int line) {
  if (poly.size() < 3) parse_error(line, "face with fewer than 3 vertices");
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) tris.push_back({poly[0], poly[k], poly[k + 1]});
}

}  // namespace

TriMesh read_obj(std::istream& in) {
  std::vector<Vec3> pos;
  std::vector<Triangle> tris;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 p;
      if (!(ls >> p.x() >> p.y() >> p.z())) parse_error(line, "malformed vertex record");
      pos.push_back(p);
    } else if (tag == "f") {
      std::vector<int> poly;
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        int idx = 0;
        try {
          std::size_t used = 0;
          idx = std::stoi(head, &used);
          if (used != head.size()) throw std::invalid_argument(head);
        } catch (const std::exception&) {
          parse_error(line, "malformed face index '" + tok + "'");
        }
        if (idx < 0) idx = static_cast<int>(pos.size()) + idx + 1;
        if (idx < 1 || idx > static_cast<int>(pos.size())) parse_error(line, "face index out of range");
        poly.push_back(idx - 1);
      }
      add_polygon(tris, poly, line);
    }
  }
  return TriMesh::build(std::move(pos), std::move(tris));
}

TriMesh read_off(std::istream& in) {
  // Tokenize everything after stripping comments; OFF is whitespace-insensitive.
  std::vector<std::pair<std::string, int>> tokens;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    raw = raw.substr(0, raw.find('#'));
    std::istringstream ls(raw);
    std::string tok;
    while (ls >> tok) tokens.emplace_back(tok, line);
  }
  std::size_t at = 0;
  auto next_line = [&] { return at < tokens.size() ? tokens[at].second : line; };
  auto next_int = [&](const char* what) {
    if (at >= tokens.size()) parse_error(line, std::string("unexpected end of file reading ") + what);
    try {
      std::size_t used = 0;
      int v = std::stoi(tokens[at].first, &used);
      if (used != tokens[at].first.size()) throw std::invalid_argument("");
      ++at;
      return v;
    } catch (const std::exception&) {
      parse_error(tokens[at].second, std::string("expected integer ") + what);
    }
  };
  auto next_double = [&] {
    if (at >= tokens.size()) parse_error(line, "unexpected end of file reading coordinates");
    try {
      return std::stod(tokens[at++].first);
    } catch (const std::exception&) {
      parse_error(tokens[at - 1].second, "expected coordinate");
    }
  };
  if (at >= tokens.size() || tokens[at].first != "OFF") parse_error(next_line(), "missing OFF header");
  ++at;
  const int nv = next_int("vertex count");
  const int nf = next_int("face count");
  next_int("edge count");
  if (nv < 0 || nf < 0) parse_error(next_line(), "negative element count");
  std::vector<Vec3> pos(nv);
  for (auto& p : pos) {
    p.x() = next_double();
    p.y() = next_double();
    p.z() = next_double();
  }
  std::vector<Triangle> tris;
  for (int f = 0; f < nf; ++f) {
    const int fl = next_line();
    const int k = next_int("face size");
    std::vector<int> poly(std::max(k, 0));
    for (auto& v : poly) {
      v = next_int("face index");
      if (v < 0 || v >= nv) parse_error(fl, "face index out of range");
    }
    add_polygon(tris, poly, fl);
    // Optional per-face colour values run to the end of the line.
    while (at < tokens.size() && tokens[at].second == fl) ++at;
  }
  return TriMesh::build(std::move(pos), std::move(tris));
}

TriMesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
  std::ifstream in(path);
  if (!in) throw MeshError(MeshError::Kind::Parse, path.string(), "cannot open mesh file");
  if (format == MeshFormat::Auto) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".obj")
      format = MeshFormat::OBJ;
    else if (ext == ".off")
      format = MeshFormat::OFF;
    else
      throw MeshError(MeshError::Kind::Parse, path.string(), "unknown mesh extension (expected .obj or .off)");
  }
  return format == MeshFormat::OBJ ? read_obj(in) : read_off(in);
}

void write_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  for (const auto& p : mesh.positions()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

}  // namespace quadcarve
