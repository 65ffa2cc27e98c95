#pragma once

#include "hjbi/common.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hjbi {

enum class FaceKind { interior, boundary_pair };

/// A mesh edge after periodic identification. The plus element is the one
/// for which `normal` is outward; minus-side coordinates map onto the plus
/// side by adding `offset`.
struct Face {
  FaceKind kind = FaceKind::interior;
  int elem_plus = -1;
  int elem_minus = -1;
  int local_edge_plus = -1;
  int local_edge_minus = -1;
  Vec2 normal = Vec2::Zero();
  Vec2 offset = Vec2::Zero();
  double h = 0.0;
};

/// Affine map x = origin + jacobian * xi from the reference triangle.
struct ElementMap {
  Vec2 origin;
  Mat2 jacobian;
  Mat2 inverse;
  double det = 0.0;

  Vec2 to_physical(const Vec2& xi) const { return origin + jacobian * xi; }
  Vec2 to_reference(const Vec2& x) const { return inverse * (x - origin); }
};

/// Reference-edge parametrisation: local edge e runs from vertex e to e+1.
Vec2 reference_edge_point(int local_edge, double t);

/// Conforming triangulation of [0,1]^2 with opposite boundary edges identified.
class PeriodicMesh {
 public:
  /// m x m squares, each cut along the (0,0)-(1,1) diagonal.
  static PeriodicMesh uniform(int m);

  /// Uniform mesh with twice the subdivisions; elements are nested.
  PeriodicMesh refined() const;

  int subdivisions() const { return m_; }
  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& elements() const { return elements_; }
  const std::vector<Face>& faces() const { return faces_; }
  std::size_t n_elements() const { return elements_.size(); }
  std::size_t n_faces() const { return faces_.size(); }

  /// Number of vertices after identifying periodic copies.
  std::size_t n_periodic_vertices() const;

  const ElementMap& map(int element) const { return maps_[element]; }
  double area(int element) const { return 0.5 * maps_[element].det; }
  Vec2 centroid(int element) const;
  std::array<Vec2, 2> edge(int element, int local_edge) const;

  /// Element containing x (taken modulo 1) and the reference coordinates of x there.
  struct Location {
    int element;
    Vec2 reference;
  };
  Location locate(const Vec2& x) const;

  /// Debug dump: `v x y`, `e i j k`, `f kind e+ e- ox oy nx ny` lines.
  void write(std::ostream& os) const;

 private:
  int m_ = 0;
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> elements_;
  std::vector<ElementMap> maps_;
  std::vector<Face> faces_;
};

struct MeshSizes {
  std::vector<double> h_element;  ///< |K|^{1/2}
  std::vector<double> h_face;     ///< edge length
  double theta = 0.0;             ///< max diam(K) / (diameter of inscribed disc)
  double h_max = 0.0;
};

MeshSizes mesh_size_functions(const PeriodicMesh& mesh);

}  // namespace hjbi
