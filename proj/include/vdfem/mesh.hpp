#pragma once

#include "vdfem/common.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace vdfem {

struct RectDomain {
  double xmin = 0.0;
  double xmax = 1.0;
  double ymin = 0.0;
  double ymax = 1.0;

  double area() const { return (xmax - xmin) * (ymax - ymin); }
  bool operator==(const RectDomain&) const = default;
};

/// A mesh edge. Interior edges are shared by elements[0] (K1) and elements[1] (K2)
/// with K1 < K2 and the unit normal pointing from K1 into K2. Boundary edges have
/// elements[1] == -1 and an outward normal.
struct Edge {
  std::array<int, 2> vertices; // ascending global vertex indices
  std::array<int, 2> elements;
  Vec2 normal;
  double length = 0.0;

  bool interior() const { return elements[1] >= 0; }
};

struct EdgeSides {
  int k1;
  int k2;
  Vec2 normal;
};

/// Affine map x = origin + jacobian * xhat from the reference triangle
/// {xhat, yhat >= 0, xhat + yhat <= 1}.
struct ElementGeometry {
  Vec2 origin;
  Mat2 jacobian;
  Mat2 inverse;
  double det = 0.0;
};

/// Structured layout of a mesh produced by build_uniform_rect_mesh; enables O(1)
/// point location.
struct UniformGrid {
  RectDomain domain;
  int nx = 0;
  int ny = 0;
};

/// Conforming triangulation with oriented edge connectivity. Immutable after
/// construction.
///
/// Local edge i of a triangle (v0, v1, v2) is opposite vertex i, i.e. runs from
/// v[(i+1)%3] to v[(i+2)%3]; with positive orientation that direction is
/// counterclockwise.
class Mesh {
public:
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
       std::optional<UniformGrid> grid = std::nullopt);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_elements() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_.at(e); }
  const std::vector<int>& interior_edges() const { return interior_edges_; }
  const std::vector<int>& boundary_edges() const { return boundary_edges_; }

  /// Global edge index of each local edge of element k.
  const std::array<int, 3>& element_edges(int k) const { return element_edges_[k]; }
  const ElementGeometry& geometry(int k) const { return geometry_[k]; }

  double area(int k) const { return 0.5 * geometry_[k].det; }
  Vec2 centroid(int k) const;
  double total_area() const;

  /// (K1, K2, n) of an interior edge. Throws for boundary edges.
  EdgeSides edge_sides(int e) const;

  Vec2 to_physical(int k, const Vec2& ref) const;
  Vec2 to_reference(int k, const Vec2& x) const;

  /// Element containing x, or nullopt when x lies outside the mesh.
  std::optional<int> locate(const Vec2& x) const;

  const std::optional<UniformGrid>& grid() const { return grid_; }

private:
  void build_edges();

  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<int> interior_edges_;
  std::vector<int> boundary_edges_;
  std::vector<std::array<int, 3>> element_edges_;
  std::vector<ElementGeometry> geometry_;
  std::optional<UniformGrid> grid_;
};

/// Uniform triangulation of a rectangle with nx * ny cells, each split along
/// its lower-left to upper-right diagonal. Cell (i, j) yields elements
/// 2 (j nx + i) (below the diagonal) and 2 (j nx + i) + 1 (above it).
Mesh build_uniform_rect_mesh(const RectDomain& domain, int nx, int ny);

/// Largest vertex-to-vertex distance over all triangles.
double max_element_diameter(const Mesh& mesh);

/// Debug dump: `VERTICES n`, coordinates, `TRIANGLES m`, index triples.
void write_mesh_dump(const Mesh& mesh, std::ostream& out);

} // namespace vdfem
