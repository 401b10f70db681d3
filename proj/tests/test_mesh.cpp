#include "support.hpp"

#include "quadcarve/mesh_io.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace quadcarve;

namespace {

MeshError::Kind obj_error(const std::string& text) {
  std::istringstream in(text);
  try {
    read_obj(in);
  } catch (const MeshError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return MeshError::Kind::Geometry;
}

const char* kTwoTriangles = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n";

}  // namespace

TEST(MeshIo, ObjQuadIsFanTriangulated) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  const TriMesh m = read_obj(in);
  EXPECT_EQ(m.num_nodes(), 4);
  EXPECT_EQ(m.num_triangles(), 2);
  EXPECT_EQ(m.num_edges(), 5);
  EXPECT_EQ(m.euler_characteristic(), 1);
}

TEST(MeshIo, ObjSlashAndNegativeIndices) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 -1//1\n");
  const TriMesh m = read_obj(in);
  EXPECT_EQ(m.num_triangles(), 1);
  EXPECT_EQ(m.triangle(0)[2], 2);
}

TEST(MeshIo, OffMatchesObj) {
  std::istringstream in("OFF\n4 2 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n3 0 1 2\n3 0 2 3\n");
  const TriMesh off = read_off(in);
  std::istringstream in2(kTwoTriangles);
  const TriMesh obj = read_obj(in2);
  EXPECT_EQ(off.num_edges(), obj.num_edges());
  EXPECT_EQ(off.boundary_loops().size(), 1u);
}

TEST(MeshIo, ParseErrorsNameTheLine) {
  std::istringstream in("v 0 0 0\nv 1 0\n");
  try {
    read_obj(in);
    FAIL();
  } catch (const MeshError& e) {
    EXPECT_EQ(e.kind(), MeshError::Kind::Parse);
    EXPECT_EQ(e.entity(), "line 2");
  }
}

TEST(MeshIo, RejectsBadTopology) {
  EXPECT_EQ(obj_error("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 -1 0\nv 0 0 1\nf 1 2 3\nf 2 1 4\nf 1 2 5\n"),
            MeshError::Kind::NonManifoldEdge);
  EXPECT_EQ(obj_error("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n"), MeshError::Kind::Degenerate);
  EXPECT_EQ(obj_error("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 2\n"), MeshError::Kind::Degenerate);
  EXPECT_EQ(obj_error("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 5 0 0\nv 6 0 0\nv 5 1 0\nf 1 2 3\nf 4 5 6\n"),
            MeshError::Kind::Disconnected);
  // Two fans sharing only a node.
  EXPECT_EQ(obj_error("v 0 0 0\nv 1 0 0\nv 0 1 0\nv -1 0 0\nv 0 -1 0\nf 1 2 3\nf 1 4 5\n"),
            MeshError::Kind::NonManifoldVertex);
  EXPECT_EQ(obj_error("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n"), MeshError::Kind::Parse);
}

TEST(MeshIo, RejectsMoebiusStrip) {
  // Strip of quads whose ends are glued with a half twist.
  const int n = 8;
  std::ostringstream obj;
  for (int k = 0; k < n; ++k) {
    const double a = kTwoPi * k / n;
    const Vec3 c(std::cos(a), std::sin(a), 0.0), r(std::cos(a), std::sin(a), 0.0);
    const Vec3 off = 0.3 * (std::cos(a / 2) * r + std::sin(a / 2) * Vec3::UnitZ());
    const Vec3 t = c + off, b = c - off;
    obj << "v " << t.x() << ' ' << t.y() << ' ' << t.z() << "\nv " << b.x() << ' ' << b.y() << ' ' << b.z() << '\n';
  }
  for (int k = 0; k < n; ++k) {
    int t0 = 2 * k + 1, b0 = 2 * k + 2, t1 = 2 * k + 3, b1 = 2 * k + 4;
    if (k == n - 1) {
      t1 = 2;
      b1 = 1;
    }
    obj << "f " << t0 << ' ' << b0 << ' ' << b1 << "\nf " << t0 << ' ' << b1 << ' ' << t1 << '\n';
  }
  EXPECT_EQ(obj_error(obj.str()), MeshError::Kind::NonOrientable);
}

TEST(MeshIo, UnknownExtension) {
  EXPECT_THROW(load_mesh("mesh.stl"), MeshError);
  EXPECT_THROW(load_mesh(qt::fixture("missing.obj")), MeshError);
}

TEST(Mesh, BoundaryTable) {
  EXPECT_EQ(boundary_index_quarters(kHalfPi), 1);
  EXPECT_EQ(boundary_index_quarters(kPi / 3), 1);
  EXPECT_EQ(boundary_index_quarters(kPi), 0);
  EXPECT_EQ(boundary_index_quarters(1.5 * kPi), -1);
  EXPECT_EQ(boundary_index_quarters(1.9 * kPi), -2);
}

TEST(Mesh, SquareBoundaryClassification) {
  const Surface s = qt::load_fixture("square.obj");
  EXPECT_EQ(s.mesh.euler_characteristic(), 1);
  ASSERT_EQ(s.mesh.boundary_loops().size(), 1u);
  EXPECT_EQ(s.boundary.index_sum_quarters(), 4);
  int corners = 0;
  for (int v = 0; v < s.mesh.num_nodes(); ++v)
    if (s.boundary.index_quarters[v] == 1) {
      ++corners;
      EXPECT_NEAR(s.boundary.interior_angle[v], kHalfPi, 1e-9);
    }
  EXPECT_EQ(corners, 4);
  // Dirichlet data is unit length and aligned with the boundary.
  for (int v = 0; v < s.mesh.num_nodes(); ++v)
    if (s.boundary.is_boundary[v]) EXPECT_NEAR(std::abs(s.boundary.value[v]), 1.0, 1e-12);
}

TEST(Mesh, LShapeHasOneReentrantCorner) {
  const Surface s = qt::load_fixture("lshape.obj");
  int reentrant = 0, convex = 0;
  for (int v = 0; v < s.mesh.num_nodes(); ++v) {
    reentrant += s.boundary.index_quarters[v] == -1;
    convex += s.boundary.index_quarters[v] == 1;
  }
  EXPECT_EQ(reentrant, 1);
  EXPECT_EQ(convex, 5);
}

TEST(Mesh, FramesAreOrthonormal) {
  for (const char* name : {"hemisphere.obj", "icosahedron.off"}) {
    const Surface s = qt::load_fixture(name);
    for (int v = 0; v < s.mesh.num_nodes(); ++v) {
      EXPECT_NEAR(s.frames.basis1[v].dot(s.frames.normal[v]), 0.0, 1e-12);
      EXPECT_NEAR((s.frames.basis1[v].cross(s.frames.basis2[v]) - s.frames.normal[v]).norm(), 0.0, 1e-12);
    }
  }
}

TEST(Mesh, TransportIsAntisymmetric) {
  const Surface s = qt::load_fixture("hemisphere.obj");
  for (int e = 0; e < s.mesh.num_edges(); ++e) {
    const auto [a, b] = s.mesh.edge(e);
    EXPECT_DOUBLE_EQ(s.transport.between(s.mesh, a, b), -s.transport.between(s.mesh, b, a));
  }
}

TEST(Mesh, ClosedSurfaceOrientedOutward) {
  const Surface s = qt::load_fixture("icosahedron.off");
  EXPECT_FALSE(s.mesh.has_boundary());
  EXPECT_EQ(s.mesh.euler_characteristic(), 2);
  Vec3 c = Vec3::Zero();
  for (const Vec3& p : s.mesh.positions()) c += p;
  c /= s.mesh.num_nodes();
  for (int t = 0; t < s.mesh.num_triangles(); ++t) EXPECT_GT(s.mesh.triangle_normal(t).dot(s.mesh.barycenter(t) - c), 0);
}
