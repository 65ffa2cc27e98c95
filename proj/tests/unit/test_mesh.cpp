#include "hjbi/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>

using namespace hjbi;

TEST(Mesh, CountsSmall) {
  const PeriodicMesh m2 = PeriodicMesh::uniform(2);
  EXPECT_EQ(m2.n_elements(), 8u);
  EXPECT_EQ(m2.n_faces(), 12u);
  EXPECT_EQ(m2.n_periodic_vertices(), 4u);
  const PeriodicMesh m1 = PeriodicMesh::uniform(1);
  EXPECT_EQ(m1.n_elements(), 2u);
  EXPECT_EQ(m1.n_faces(), 3u);
  EXPECT_EQ(m1.n_periodic_vertices(), 1u);
}

TEST(Mesh, AreasTileTheCellAndAreCounterclockwise) {
  const PeriodicMesh mesh = PeriodicMesh::uniform(8);
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    EXPECT_GT(mesh.map(int(e)).det, 0.0);
    total += mesh.area(int(e));
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Mesh, EveryFaceHasTwoElementsAndMatchingEdges) {
  const PeriodicMesh mesh = PeriodicMesh::uniform(8);
  std::vector<int> edge_use(mesh.n_elements() * 3, 0);
  for (const Face& f : mesh.faces()) {
    ASSERT_GE(f.elem_plus, 0);
    ASSERT_GE(f.elem_minus, 0);
    EXPECT_NEAR(f.normal.norm(), 1.0, 1e-12);
    EXPECT_GT(f.h, 0.0);
    const bool shifted = f.offset.norm() > 0.0;
    EXPECT_EQ(shifted, f.kind == FaceKind::boundary_pair);
    EXPECT_TRUE(f.offset.norm() == 0.0 || std::abs(f.offset.norm() - 1.0) < 1e-15);
    // brute-force edge matching: the minus edge shifted by the offset is the plus edge
    const auto ep = mesh.edge(f.elem_plus, f.local_edge_plus);
    const auto em = mesh.edge(f.elem_minus, f.local_edge_minus);
    const Vec2 a = em[0] + f.offset, b = em[1] + f.offset;
    const bool same = ((a - ep[0]).norm() < 1e-12 && (b - ep[1]).norm() < 1e-12) ||
                      ((a - ep[1]).norm() < 1e-12 && (b - ep[0]).norm() < 1e-12);
    EXPECT_TRUE(same);
    // outward from the plus element
    const Vec2 mid = 0.5 * (ep[0] + ep[1]);
    EXPECT_GT(f.normal.dot(mid - mesh.centroid(f.elem_plus)), 0.0);
    ++edge_use[f.elem_plus * 3 + f.local_edge_plus];
    ++edge_use[f.elem_minus * 3 + f.local_edge_minus];
  }
  for (int u : edge_use) EXPECT_EQ(u, 1);
}

TEST(Mesh, SizeFunctions) {
  const PeriodicMesh mesh = PeriodicMesh::uniform(2);
  const MeshSizes s = mesh_size_functions(mesh);
  for (double h : s.h_element) EXPECT_NEAR(h, std::sqrt(1.0 / 8.0), 1e-15);
  for (std::size_t i = 0; i < mesh.n_faces(); ++i) {
    const Vec2 n = mesh.faces()[i].normal;
    const bool axis = std::abs(n.x()) < 1e-12 || std::abs(n.y()) < 1e-12;
    EXPECT_NEAR(s.h_face[i], axis ? 0.5 : std::sqrt(2.0) / 2.0, 1e-15);
  }
  // diam / (2 * inradius), inradius = area / semiperimeter
  const double legs = 0.5, diam = std::sqrt(2.0) * legs;
  const double inradius = (0.5 * legs * legs) / (0.5 * (2 * legs + diam));
  EXPECT_NEAR(s.theta, diam / (2.0 * inradius), 1e-12);
  EXPECT_NEAR(s.theta, 1.0 + std::sqrt(2.0), 1e-12);
}

TEST(Mesh, RefinementIsSimilar) {
  const PeriodicMesh coarse = PeriodicMesh::uniform(2);
  const PeriodicMesh fine = coarse.refined();
  EXPECT_EQ(fine.n_elements(), 32u);
  double total = 0.0;
  for (std::size_t e = 0; e < fine.n_elements(); ++e) total += fine.area(int(e));
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(mesh_size_functions(fine).theta, mesh_size_functions(coarse).theta, 1e-12);
}

TEST(Mesh, LocateWrapsPeriodically) {
  const PeriodicMesh mesh = PeriodicMesh::uniform(4);
  const Vec2 x(0.37, 0.81);
  const auto a = mesh.locate(x), b = mesh.locate(x + Vec2(1.0, -2.0));
  EXPECT_EQ(a.element, b.element);
  EXPECT_NEAR((mesh.map(a.element).to_physical(a.reference) - x).norm(), 0.0, 1e-12);
}

TEST(Mesh, RejectsNonpositiveSubdivisions) { EXPECT_THROW(PeriodicMesh::uniform(0), Error); }
