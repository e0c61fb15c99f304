#pragma once

#include "vdfem/common.hpp"

#include <vector>

namespace vdfem {

/// Rule on the reference triangle {x, y >= 0, x + y <= 1}; points are the
/// reference coordinates (equivalently the barycentric weights of vertices 1, 2).
struct TriangleRule {
  std::vector<Vec2> points;
  std::vector<double> weights;
  int exact_degree = 0;

  int size() const { return static_cast<int>(points.size()); }
};

/// Rule on [0, 1].
struct IntervalRule {
  std::vector<double> points;
  std::vector<double> weights;
  int exact_degree = 0;

  int size() const { return static_cast<int>(points.size()); }
};

inline constexpr int kMaxQuadratureDegree = 20;

/// Gauss-Jacobi nodes and weights for the weight (1-t)^alpha (1+t)^beta on
/// [-1, 1], computed with the Golub-Welsch eigenvalue method.
void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights);

/// Collapsed-coordinate (Stroud conical product) rule exact to `degree`.
/// Degrees 0 and 1 give the one-point centroid rule.
TriangleRule triangle_rule(int degree);

/// Gauss-Legendre rule exact to `degree`.
IntervalRule interval_rule(int degree);

} // namespace vdfem
