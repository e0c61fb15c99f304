#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace vdfem;
using namespace vdfem::test;

namespace {

double max_abs_coeff(const DiscreteField& u) { return u.coeffs().cwiseAbs().maxCoeff(); }

} // namespace

TEST(Spaces, LocalDimensions) {
  auto mesh = rect_mesh(0, 1, 1);
  for (int s = 0; s <= 2; ++s) {
    EXPECT_EQ(build_space(mesh, SpaceKind::RT, s)->local_dim(), (s + 1) * (s + 3));
    EXPECT_EQ(build_space(mesh, SpaceKind::BDM, s + 1)->local_dim(), (s + 2) * (s + 3));
  }
  for (int m = 0; m <= 4; ++m)
    EXPECT_EQ(build_space(mesh, SpaceKind::DG, m)->local_dim(), (m + 1) * (m + 2) / 2);
}

TEST(Spaces, GlobalDimensions) {
  auto mesh = rect_mesh(-1, 1, 4);
  EXPECT_EQ(build_space(mesh, SpaceKind::DG, 1)->global_dim(), 96);
  const auto rt1 = build_space(mesh, SpaceKind::RT, 1);
  EXPECT_EQ(rt1->global_dim(), 2 * mesh->num_edges() + 2 * mesh->num_elements());
  EXPECT_EQ(rt1->num_free(), 2 * static_cast<int>(mesh->interior_edges().size()) + 2 * mesh->num_elements());
}

TEST(Spaces, UnsupportedDegrees) {
  auto mesh = rect_mesh(0, 1, 1);
  EXPECT_THROW(build_space(mesh, SpaceKind::RT, 3), Error);
  EXPECT_THROW(build_space(mesh, SpaceKind::RT, -1), Error);
  EXPECT_THROW(build_space(mesh, SpaceKind::BDM, 0), Error);
  EXPECT_THROW(build_space(mesh, SpaceKind::BDM, 4), Error);
  EXPECT_THROW(build_space(mesh, SpaceKind::DG, 5), Error);
}

TEST(Spaces, ConstantDgField) {
  auto mesh = rect_mesh(-1, 1, 2);
  auto F = build_space(mesh, SpaceKind::DG, 0);
  const QuadratureSet qs(2, 2);
  const DiscreteField one = l2_project_scalar(analytic([](const Vec2&) { return 1.0; }, *mesh, qs), F, qs);
  DiscreteField c(F, 3.25 * one.coeffs());
  for (int k = 0; k < mesh->num_elements(); ++k)
    for (double v : scalar_values(c, qs, k, QuadratureSet::kVolume))
      EXPECT_NEAR(v, 3.25, 1e-14);
  EXPECT_NEAR(eval_scalar_at(c, Vec2(0.1, 0.2)), 3.25, 1e-14);
}

// Normal traces agree across interior edges; boundary traces vanish once constrained DOFs are zeroed.
TEST(Spaces, HdivConformity) {
  std::mt19937 gen(1);
  for (auto [kind, deg] : {std::pair{SpaceKind::RT, 0}, std::pair{SpaceKind::RT, 1}, std::pair{SpaceKind::RT, 2},
                           std::pair{SpaceKind::BDM, 1}, std::pair{SpaceKind::BDM, 2}, std::pair{SpaceKind::BDM, 3}}) {
    auto mesh = std::make_shared<const Mesh>(build_uniform_rect_mesh({-1, 2, 0, 1}, 3, 2));
    auto U = build_space(mesh, kind, deg);
    const QuadratureSet qs(4, 8);
    const DiscreteField u = random_velocity(gen, U);
    double sup = 0.0;
    for (int k = 0; k < mesh->num_elements(); ++k)
      sup = std::max(sup, vector_values(u, qs, k, QuadratureSet::kVolume).cwiseAbs().maxCoeff());
    for (int e = 0; e < mesh->num_edges(); ++e) {
      const EdgeTrace t1 = edge_trace(*mesh, e, 0);
      const DenseMatrix v1 = vector_values(u, qs, t1.element, t1.set);
      const Vec2 n = mesh->edge(e).normal;
      if (mesh->edge(e).interior()) {
        const EdgeTrace t2 = edge_trace(*mesh, e, 1);
        const DenseMatrix v2 = vector_values(u, qs, t2.element, t2.set);
        EXPECT_LE(((v1 - v2) * n).cwiseAbs().maxCoeff(), 1e-12 * sup) << to_string(kind) << deg;
      } else {
        EXPECT_LE((v1 * n).cwiseAbs().maxCoeff(), 1e-12 * sup) << to_string(kind) << deg;
      }
    }
  }
}

// div u_h lies in DG(s): projecting it onto DG(s) loses nothing.
TEST(Spaces, DivergenceInclusion) {
  std::mt19937 gen(2);
  for (int s = 0; s <= 2; ++s)
    for (SpaceKind kind : {SpaceKind::RT, SpaceKind::BDM}) {
      const Discretization d = make_discretization(rect_mesh(-1, 1, 2), kind, s, s);
      const DiscreteField u(d.velocity, random_vector(gen, d.velocity->global_dim()));
      const QuadratureSet& qs = *d.quad;
      ScalarEvaluator div = [&](int k, int set) {
        return Vector(d.velocity->mapped_vector(qs, k, set).div * u.local_coeffs(k));
      };
      const DiscreteField p = l2_project_scalar(div, d.pressure, qs);
      for (int k = 0; k < d.mesh->num_elements(); ++k) {
        const auto pts = qs.points(QuadratureSet::kVolume);
        const auto dv = eval_divergence(u, k, pts);
        const auto pv = eval_scalar(p, k, pts);
        for (std::size_t q = 0; q < pts.size(); ++q)
          EXPECT_NEAR(dv[q], pv[q], 1e-11 * (1.0 + std::abs(dv[q])));
      }
    }
}

TEST(Spaces, ProjectionIdentityOnSpace) {
  std::mt19937 gen(3);
  auto mesh = rect_mesh(-1, 1, 3);
  for (int m = 0; m <= 4; ++m) {
    auto F = build_space(mesh, SpaceKind::DG, m);
    const QuadratureSet qs(2 * m + 1, 2 * m + 1);
    const DiscreteField f = random_scalar(gen, F);
    const DiscreteField p = l2_project_scalar(evaluator(f, qs), F, qs);
    EXPECT_LE((p.coeffs() - f.coeffs()).cwiseAbs().maxCoeff(), 1e-13 * (1.0 + f.coeffs().cwiseAbs().maxCoeff()));
  }
}

// <proj f, g> = <f, g> for every basis function g.
TEST(Spaces, ProjectionOrthogonality) {
  auto mesh = rect_mesh(-1, 1, 3);
  auto F = build_space(mesh, SpaceKind::DG, 2);
  const QuadratureSet qs(12, 12);
  const auto fn = [](const Vec2& x) { return std::exp(x.x()) * std::sin(3 * x.y()); };
  const DiscreteField p = l2_project_scalar(analytic(fn, *mesh, qs), F, qs);
  const Vector lhs = assemble_mass(*F, qs) * p.coeffs();
  const Vector rhs = assemble_scalar_load(analytic(fn, *mesh, qs), *F, qs);
  EXPECT_LE((lhs - rhs).norm(), 1e-12 * rhs.norm());
}

// A div-free RT_0 field is constant per element, so u . u projects exactly onto DG(0).
TEST(Spaces, Rt0SquareProjectedExactly) {
  std::mt19937 gen(4);
  const Discretization d = make_discretization(rect_mesh(-1, 1, 4), SpaceKind::RT, 0, 0);
  const DiscreteField u = random_divfree(gen, d);
  EXPECT_LE(product_projection_defect(u, u, d.density, *d.quad, gen), 1e-12);
}

TEST(Spaces, OrderConditionProjection) {
  std::mt19937 gen(5);
  for (auto [kind, s, m] : {std::tuple{SpaceKind::RT, 0, 0}, std::tuple{SpaceKind::RT, 1, 2},
                            std::tuple{SpaceKind::RT, 2, 4}, std::tuple{SpaceKind::BDM, 0, 2},
                            std::tuple{SpaceKind::BDM, 1, 4}}) {
    ASSERT_TRUE(product_projection_is_exact(kind, s, m));
    const Discretization d = make_discretization(rect_mesh(-1, 1, 2), kind, s, m);
    const DiscreteField u = random_divfree(gen, d), v = random_divfree(gen, d);
    const double scale = max_abs_coeff(u) * max_abs_coeff(v);
    EXPECT_LE(product_projection_defect(u, v, d.density, *d.quad, gen), 1e-12 * scale) << to_string(kind) << s << m;
  }
  // Below the threshold the projection is visibly inexact.
  EXPECT_FALSE(product_projection_is_exact(SpaceKind::RT, 1, 1));
  EXPECT_FALSE(product_projection_is_exact(SpaceKind::BDM, 0, 1));
  const Discretization d = make_discretization(rect_mesh(-1, 1, 2), SpaceKind::RT, 1, 1);
  const DiscreteField u = random_divfree(gen, d);
  EXPECT_GT(product_projection_defect(u, u, d.density, *d.quad, gen), 1e-6);
}

TEST(Spaces, DivfreeProjectionOfZero) {
  const Discretization d = make_discretization(rect_mesh(-1, 1, 4), SpaceKind::RT, 1, 1);
  const DiscreteField u = project_velocity_divfree(
      analytic_vector([](const Vec2&) { return Vec2(0, 0); }, *d.mesh, *d.quad), d.velocity, d.pressure, *d.quad);
  EXPECT_EQ(u.coeffs().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Spaces, DivfreeProjectionOfVortex) {
  for (int s = 0; s <= 2; ++s)
    for (SpaceKind kind : {SpaceKind::RT, SpaceKind::BDM}) {
      const Discretization d = make_discretization(rect_mesh(-1, 1, 4), kind, s, s);
      const auto u0 = [](const Vec2& x) {
        using std::numbers::pi;
        return Vec2(-std::cos(pi * x.x() / 2) * std::sin(pi * x.y() / 2),
                    std::sin(pi * x.x() / 2) * std::cos(pi * x.y() / 2));
      };
      const DiscreteField u = project_velocity_divfree(analytic_vector(u0, *d.mesh, *d.quad), d.velocity, d.pressure,
                                                       *d.quad);
      EXPECT_LE(max_divergence(u, *d.quad), 1e-10 * l2_norm(u, *d.quad));
    }
}

TEST(Spaces, DivfreeProjectionFixesSubspace) {
  std::mt19937 gen(6);
  const Discretization d = make_discretization(rect_mesh(-1, 1, 4), SpaceKind::BDM, 1, 1);
  const DiscreteField u = random_divfree(gen, d);
  const DiscreteField again = project_velocity_divfree(vector_evaluator(u, *d.quad), d.velocity, d.pressure, *d.quad);
  EXPECT_LE((again.coeffs() - u.coeffs()).norm(), 1e-12 * u.coeffs().norm());
}

TEST(Spaces, InterpolationReproducesPolynomials) {
  auto mesh = rect_mesh(-1, 1, 3);
  const auto quad = [](const Vec2& x) { return Vec2(x.y() * x.y() - 0.5 * x.x(), x.x() * x.y() + 1.0); };
  for (auto [kind, deg] : {std::pair{SpaceKind::RT, 2}, std::pair{SpaceKind::BDM, 2}}) {
    auto U = build_space(mesh, kind, deg);
    const DiscreteField u = interpolate_vector(quad, U);
    for (int k = 0; k < mesh->num_elements(); ++k)
      EXPECT_NEAR((eval_vector_at(u, mesh->centroid(k)) - quad(mesh->centroid(k))).norm(), 0.0, 1e-13);
  }
}

TEST(Spaces, QuadratureDegrees) {
  // RT_0 (full degree 1) with DG_1 density: volume 3 + 1 - 1, edge 3 + 1.
  EXPECT_EQ(scheme_volume_degree(1, 1), 3);
  EXPECT_EQ(scheme_edge_degree(1, 1), 4);
  EXPECT_EQ(scheme_volume_degree(3, 2), 10);
  EXPECT_EQ(scheme_edge_degree(3, 2), 11);
  EXPECT_LE(scheme_edge_degree(4, 4), kMaxQuadratureDegree);
}
