#include "hjbi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

namespace hjbi {

namespace {

const std::array<Vec2, 3> kRefVertices = {Vec2(0.0, 0.0), Vec2(1.0, 0.0), Vec2(0.0, 1.0)};

long wrap(long k, long period) { return ((k % period) + period) % period; }

}  // namespace

Vec2 reference_edge_point(int local_edge, double t) {
  const Vec2& a = kRefVertices[local_edge];
  const Vec2& b = kRefVertices[(local_edge + 1) % 3];
  return a + t * (b - a);
}

PeriodicMesh PeriodicMesh::uniform(int m) {
  require(m >= 1, "uniform mesh needs m >= 1");
  PeriodicMesh mesh;
  mesh.m_ = m;
  const double h = 1.0 / m;
  auto vid = [m](int i, int j) { return j * (m + 1) + i; };
  mesh.vertices_.reserve(static_cast<std::size_t>(m + 1) * (m + 1));
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i) mesh.vertices_.emplace_back(i * h, j * h);

  mesh.elements_.reserve(2 * static_cast<std::size_t>(m) * m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < m; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
      mesh.elements_.push_back({v00, v10, v11});
      mesh.elements_.push_back({v00, v11, v01});
    }
  }

  mesh.maps_.reserve(mesh.elements_.size());
  for (const auto& tri : mesh.elements_) {
    ElementMap map;
    map.origin = mesh.vertices_[tri[0]];
    map.jacobian.col(0) = mesh.vertices_[tri[1]] - map.origin;
    map.jacobian.col(1) = mesh.vertices_[tri[2]] - map.origin;
    map.det = map.jacobian.determinant();
    map.inverse = map.jacobian.inverse();
    mesh.maps_.push_back(map);
  }

  // Pair edges by their midpoint taken modulo 1, on the grid of half-steps.
  const long period = 2L * m;
  std::map<std::pair<long, long>, std::vector<std::pair<int, int>>> by_midpoint;
  for (int e = 0; e < static_cast<int>(mesh.elements_.size()); ++e) {
    for (int k = 0; k < 3; ++k) {
      const auto [a, b] = mesh.edge(e, k);
      const Vec2 mid = 0.5 * (a + b);
      const long kx = wrap(std::lround(mid.x() * period), period);
      const long ky = wrap(std::lround(mid.y() * period), period);
      by_midpoint[{kx, ky}].emplace_back(e, k);
    }
  }

  mesh.faces_.reserve(by_midpoint.size());
  for (const auto& [key, sides] : by_midpoint) {
    if (sides.size() != 2) fail(ErrorKind::invalid_argument, "periodic edge pairing failed");
    Face face;
    face.elem_plus = sides[0].first;
    face.local_edge_plus = sides[0].second;
    face.elem_minus = sides[1].first;
    face.local_edge_minus = sides[1].second;
    const auto [a, b] = mesh.edge(face.elem_plus, face.local_edge_plus);
    const auto [c, d] = mesh.edge(face.elem_minus, face.local_edge_minus);
    const Vec2 dir = b - a;
    face.h = dir.norm();
    face.normal = Vec2(dir.y(), -dir.x()) / face.h;
    face.offset = (0.5 * (a + b) - 0.5 * (c + d)).array().round().matrix();
    face.kind = face.offset.isZero() ? FaceKind::interior : FaceKind::boundary_pair;
    mesh.faces_.push_back(face);
  }
  // Deterministic order independent of the map's key layout: sort by plus element, edge.
  std::sort(mesh.faces_.begin(), mesh.faces_.end(), [](const Face& x, const Face& y) {
    return std::pair(x.elem_plus, x.local_edge_plus) < std::pair(y.elem_plus, y.local_edge_plus);
  });
  return mesh;
}

PeriodicMesh PeriodicMesh::refined() const { return uniform(2 * m_); }

std::size_t PeriodicMesh::n_periodic_vertices() const {
  std::set<std::pair<long, long>> unique;
  const long period = m_;
  for (const Vec2& v : vertices_)
    unique.emplace(wrap(std::lround(v.x() * period), period), wrap(std::lround(v.y() * period), period));
  return unique.size();
}

Vec2 PeriodicMesh::centroid(int element) const {
  const auto& tri = elements_[element];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

std::array<Vec2, 2> PeriodicMesh::edge(int element, int local_edge) const {
  const auto& tri = elements_[element];
  return {vertices_[tri[local_edge]], vertices_[tri[(local_edge + 1) % 3]]};
}

PeriodicMesh::Location PeriodicMesh::locate(const Vec2& x) const {
  Vec2 y(x.x() - std::floor(x.x()), x.y() - std::floor(x.y()));
  const int i = std::min(m_ - 1, static_cast<int>(std::floor(y.x() * m_)));
  const int j = std::min(m_ - 1, static_cast<int>(std::floor(y.y() * m_)));
  const double lx = y.x() * m_ - i;
  const double ly = y.y() * m_ - j;
  const int element = 2 * (j * m_ + i) + (ly > lx ? 1 : 0);
  return {element, maps_[element].to_reference(y)};
}

void PeriodicMesh::write(std::ostream& os) const {
  os.precision(17);
  for (const Vec2& v : vertices_) os << "v " << v.x() << ' ' << v.y() << '\n';
  for (const auto& t : elements_) os << "e " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const Face& f : faces_) {
    os << "f " << (f.kind == FaceKind::interior ? "interior" : "boundary-pair") << ' ' << f.elem_plus << ' '
       << f.elem_minus << ' ' << f.offset.x() << ' ' << f.offset.y() << ' ' << f.normal.x() << ' '
       << f.normal.y() << '\n';
  }
}

MeshSizes mesh_size_functions(const PeriodicMesh& mesh) {
  MeshSizes sizes;
  sizes.h_element.reserve(mesh.n_elements());
  for (int e = 0; e < static_cast<int>(mesh.n_elements()); ++e) {
    const double area = mesh.area(e);
    double perimeter = 0.0;
    double diameter = 0.0;
    for (int k = 0; k < 3; ++k) {
      const auto [a, b] = mesh.edge(e, k);
      const double len = (b - a).norm();
      perimeter += len;
      diameter = std::max(diameter, len);
    }
    const double inscribed_diameter = 4.0 * area / perimeter;
    sizes.h_element.push_back(std::sqrt(area));
    sizes.h_max = std::max(sizes.h_max, sizes.h_element.back());
    sizes.theta = std::max(sizes.theta, diameter / inscribed_diameter);
  }
  sizes.h_face.reserve(mesh.n_faces());
  for (const Face& f : mesh.faces()) sizes.h_face.push_back(f.h);
  return sizes;
}

}  // namespace hjbi
