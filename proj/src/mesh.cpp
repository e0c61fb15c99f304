#include "vdfem/mesh.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <utility>

namespace vdfem {

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
           std::optional<UniformGrid> grid)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)), grid_(std::move(grid)) {
  if (triangles_.empty())
    throw Error("mesh: no triangles");
  const int nv = num_vertices();
  geometry_.reserve(triangles_.size());
  for (std::size_t k = 0; k < triangles_.size(); ++k) {
    const auto& t = triangles_[k];
    for (int v : t)
      if (v < 0 || v >= nv)
        throw Error("mesh: triangle " + std::to_string(k) + " references missing vertex");
    ElementGeometry g;
    g.origin = vertices_[t[0]];
    g.jacobian.col(0) = vertices_[t[1]] - vertices_[t[0]];
    g.jacobian.col(1) = vertices_[t[2]] - vertices_[t[0]];
    g.det = g.jacobian.determinant();
    if (!(g.det > 0.0))
      throw Error("mesh: triangle " + std::to_string(k) + " has non-positive signed area");
    g.inverse = g.jacobian.inverse();
    geometry_.push_back(g);
  }
  build_edges();
}

void Mesh::build_edges() {
  std::map<std::pair<int, int>, int> lookup;
  element_edges_.assign(triangles_.size(), {-1, -1, -1});
  for (int k = 0; k < num_elements(); ++k) {
    const auto& t = triangles_[k];
    for (int i = 0; i < 3; ++i) {
      int a = t[(i + 1) % 3];
      int b = t[(i + 2) % 3];
      if (a > b)
        std::swap(a, b);
      auto [it, inserted] = lookup.try_emplace({a, b}, num_edges());
      if (inserted) {
        Edge e;
        e.vertices = {a, b};
        e.elements = {k, -1};
        edges_.push_back(e);
      } else {
        Edge& e = edges_[it->second];
        if (e.elements[1] >= 0)
          throw Error("mesh: edge shared by more than two triangles");
        e.elements[1] = k; // k > elements[0] since elements are visited in order
      }
      element_edges_[k][i] = it->second;
    }
  }

  for (int ei = 0; ei < num_edges(); ++ei) {
    Edge& e = edges_[ei];
    const Vec2 tangent = vertices_[e.vertices[1]] - vertices_[e.vertices[0]];
    e.length = tangent.norm();
    Vec2 n(tangent.y(), -tangent.x());
    n /= e.length;
    const Vec2 mid = 0.5 * (vertices_[e.vertices[0]] + vertices_[e.vertices[1]]);
    // K1 -> K2 for interior edges, outward from K1 on the boundary
    if (n.dot(mid - centroid(e.elements[0])) < 0.0)
      n = -n;
    e.normal = n;
    (e.interior() ? interior_edges_ : boundary_edges_).push_back(ei);
  }
}

Vec2 Mesh::centroid(int k) const {
  const auto& t = triangles_[k];
  return (vertices_[t[0]] + vertices_[t[1]] + vertices_[t[2]]) / 3.0;
}

double Mesh::total_area() const {
  double a = 0.0;
  for (int k = 0; k < num_elements(); ++k)
    a += area(k);
  return a;
}

EdgeSides Mesh::edge_sides(int e) const {
  const Edge& ed = edges_.at(e);
  if (!ed.interior())
    throw Error("mesh: edge " + std::to_string(e) + " is a boundary edge");
  return {ed.elements[0], ed.elements[1], ed.normal};
}

Vec2 Mesh::to_physical(int k, const Vec2& ref) const {
  const auto& g = geometry_[k];
  return g.origin + g.jacobian * ref;
}

Vec2 Mesh::to_reference(int k, const Vec2& x) const {
  const auto& g = geometry_[k];
  return g.inverse * (x - g.origin);
}

std::optional<int> Mesh::locate(const Vec2& x) const {
  constexpr double tol = 1e-12;
  auto inside = [&](int k) {
    const Vec2 r = to_reference(k, x);
    return r.x() >= -tol && r.y() >= -tol && r.x() + r.y() <= 1.0 + tol;
  };
  if (grid_) {
    const auto& d = grid_->domain;
    const double hx = (d.xmax - d.xmin) / grid_->nx;
    const double hy = (d.ymax - d.ymin) / grid_->ny;
    const double fx = (x.x() - d.xmin) / hx;
    const double fy = (x.y() - d.ymin) / hy;
    if (fx < -tol || fy < -tol || fx > grid_->nx + tol || fy > grid_->ny + tol)
      return std::nullopt;
    const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, grid_->nx - 1);
    const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, grid_->ny - 1);
    const int lower = 2 * (j * grid_->nx + i);
    const int k = (fy - j) <= (fx - i) ? lower : lower + 1;
    if (inside(k))
      return k;
    if (inside(k ^ 1))
      return k ^ 1;
  }
  for (int k = 0; k < num_elements(); ++k)
    if (inside(k))
      return k;
  return std::nullopt;
}

Mesh build_uniform_rect_mesh(const RectDomain& domain, int nx, int ny) {
  if (nx < 1 || ny < 1)
    throw Error("build_uniform_rect_mesh: nx and ny must be positive");
  if (!(domain.xmax > domain.xmin) || !(domain.ymax > domain.ymin))
    throw Error("build_uniform_rect_mesh: empty domain");

  std::vector<Vec2> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      vertices.emplace_back(domain.xmin + (domain.xmax - domain.xmin) * i / nx,
                            domain.ymin + (domain.ymax - domain.ymin) * j / ny);

  auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  return Mesh(std::move(vertices), std::move(triangles), UniformGrid{domain, nx, ny});
}

double max_element_diameter(const Mesh& mesh) {
  if (mesh.num_elements() == 0)
    throw Error("max_element_diameter: empty mesh");
  double h = 0.0;
  for (const auto& t : mesh.triangles())
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        h = std::max(h, (mesh.vertices()[t[a]] - mesh.vertices()[t[b]]).norm());
  return h;
}

void write_mesh_dump(const Mesh& mesh, std::ostream& out) {
  out.precision(17);
  out << "VERTICES " << mesh.num_vertices() << '\n';
  for (const auto& v : mesh.vertices())
    out << v.x() << ' ' << v.y() << '\n';
  out << "TRIANGLES " << mesh.num_elements() << '\n';
  for (const auto& t : mesh.triangles())
    out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

} // namespace vdfem
