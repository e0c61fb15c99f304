#pragma once

#include "vdfem/assembly.hpp"
#include "vdfem/diagnostics.hpp"
#include "vdfem/mesh.hpp"
#include "vdfem/spaces.hpp"

#include <memory>
#include <random>

namespace vdfem::test {

inline std::shared_ptr<const Mesh> rect_mesh(double a, double b, int n) {
  return std::make_shared<const Mesh>(build_uniform_rect_mesh({a, b, a, b}, n, n));
}

inline std::shared_ptr<const Mesh> reference_triangle_mesh() {
  return std::make_shared<const Mesh>(std::vector<Vec2>{{0, 0}, {1, 0}, {0, 1}},
                                      std::vector<std::array<int, 3>>{{0, 1, 2}});
}

inline Vector random_vector(std::mt19937& gen, int n) {
  std::normal_distribution<double> N;
  Vector v(n);
  for (int i = 0; i < n; ++i)
    v(i) = N(gen);
  return v;
}

/// Random velocity with boundary-normal DOFs zeroed.
inline DiscreteField random_velocity(std::mt19937& gen, const std::shared_ptr<const FESpace>& U) {
  DiscreteField u(U, random_vector(gen, U->global_dim()));
  for (int c : U->constrained_dofs())
    u.coeffs()(c) = 0.0;
  return u;
}

inline DiscreteField random_scalar(std::mt19937& gen, const std::shared_ptr<const FESpace>& F) {
  return DiscreteField(F, random_vector(gen, F->global_dim()));
}

/// Divergence-free projection of a random velocity.
inline DiscreteField random_divfree(std::mt19937& gen, const Discretization& d) {
  const DiscreteField r = random_velocity(gen, d.velocity);
  return project_velocity_divfree(vector_evaluator(r, *d.quad), d.velocity, d.pressure, *d.quad);
}

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a + b + 2)!.
inline double monomial_integral(int a, int b) {
  double num = 1.0, den = 1.0;
  for (int i = 2; i <= a; ++i)
    num *= i;
  for (int i = 2; i <= b; ++i)
    num *= i;
  for (int i = 2; i <= a + b + 2; ++i)
    den *= i;
  return num / den;
}

inline Vec2 random_reference_point(std::mt19937& gen, double margin = 0.05) {
  std::uniform_real_distribution<double> U(margin, 1.0 - 2 * margin);
  for (;;) {
    const Vec2 p(U(gen), U(gen));
    if (p.x() + p.y() <= 1.0 - margin)
      return p;
  }
}

} // namespace vdfem::test

namespace vdfem::test {

/// Pointwise u . v on the point sets of qs.
inline ScalarEvaluator dot_evaluator(const DiscreteField& u, const DiscreteField& v, const QuadratureSet& qs) {
  return [&u, &v, &qs](int k, int set) {
    return Vector(vector_values(u, qs, k, set).cwiseProduct(vector_values(v, qs, k, set)).rowwise().sum());
  };
}

/// max over elements and sample points of |proj(u . v) - u . v|.
inline double product_projection_defect(const DiscreteField& u, const DiscreteField& v,
                                        const std::shared_ptr<const FESpace>& F, const QuadratureSet& qs,
                                        std::mt19937& gen) {
  const DiscreteField p = l2_project_scalar(dot_evaluator(u, v, qs), F, qs);
  const Mesh& mesh = F->mesh();
  double worst = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k)
    for (int i = 0; i < 6; ++i) {
      const Vec2 r = random_reference_point(gen, 0.0);
      const std::span<const Vec2> pt(&r, 1);
      const double exact = eval_vector(u, k, pt)[0].dot(eval_vector(v, k, pt)[0]);
      worst = std::max(worst, std::abs(eval_scalar(p, k, pt)[0] - exact));
    }
  return worst;
}

} // namespace vdfem::test
