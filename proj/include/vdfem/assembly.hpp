#pragma once

#include "vdfem/common.hpp"
#include "vdfem/spaces.hpp"

namespace vdfem {

/// Upwind constants: alpha_e(u) = c1 sgn(u . n), beta_e(u) = c2 |u . n|.
/// c1 = c2 = 1/2 is full upwinding, c1 = c2 = 0 switches it off.
struct UpwindConfig {
  double c1 = 0.0;
  double c2 = 0.0;

  bool enabled() const { return c1 != 0.0 || c2 != 0.0; }
  void validate() const;
};

// All assemblers iterate elements and edges in index order and build matrices
// through setFromTriplets, so identical inputs give bit-identical output.
//
// Vector fields passed as evaluators may be arbitrary piecewise smooth fields;
// they are sampled at quadrature points only. Edge terms are integrated once
// per interior edge with the stored (K1, K2, n) convention; u . n for a U_h
// field is read from the K1 side.

/// M(i, j) = <phi_j, phi_i> for a vector or scalar space.
SparseMatrix assemble_mass(const FESpace& space, const QuadratureSet& qs);

/// M(i, j) = <rho phi_j, phi_i> on U_h.
SparseMatrix assemble_weighted_velocity_mass(const ScalarEvaluator& rho, const FESpace& U, const QuadratureSet& qs);

/// D(q, j) = <div phi_j, psi_q>, rows in Q_h, columns in U_h.
SparseMatrix assemble_div_coupling(const FESpace& U, const FESpace& Q, const QuadratureSet& qs);

/// m(i) = int psi_i dx.
Vector pressure_mean_weights(const FESpace& Q, const QuadratureSet& qs);

/// Coefficients of the constant function 1 in a DG space.
Vector constant_coefficients(const FESpace& Q, const QuadratureSet& qs);

/// f(i) = <f, phi_i> on U_h.
Vector assemble_vector_load(const VectorEvaluator& f, const FESpace& U, const QuadratureSet& qs);

/// f(i) = <f, psi_i> on a DG space.
Vector assemble_scalar_load(const ScalarEvaluator& f, const FESpace& F, const QuadratureSet& qs);

/// A with v^T A u = a_h(w, u, v):
///   sum_K int_K w . (v . grad u - u . grad v) + sum_e int_e (n x {w}) [[u x v]].
SparseMatrix assemble_a(const VectorEvaluator& w, const FESpace& U, const QuadratureSet& qs);

/// W with W(i, j) = a_h(rho phi_j, u, phi_i): a_h as a function of its first slot,
/// restricted to momenta rho * v for v in U_h.
SparseMatrix assemble_a_momentum_slot(const ScalarEvaluator& rho, const DiscreteField& u, const QuadratureSet& qs);

/// B with g^T B f = b_h(u, f, g) = sum_K int_K (u . grad f) g - sum_e int_e u . [[f]] {g}.
/// Rows index G, columns index F.
SparseMatrix assemble_b(const VectorEvaluator& u, const FESpace& F, const FESpace& G, const QuadratureSet& qs);

/// L(i) = b_h(phi_i, kdot, rho) for phi_i in U_h.
Vector assemble_b_transpose_load(const DiscreteField& kdot, const ScalarEvaluator& rho, const FESpace& U,
                                 const QuadratureSet& qs);

/// T with T c = assemble_b_transpose_load(kdot) for kdot with coefficients c in F.
/// Rows index U, columns index F.
SparseMatrix assemble_b_transpose(const ScalarEvaluator& rho, const FESpace& F, const FESpace& U,
                                  const QuadratureSet& qs);

/// P with P x = coefficients of the DG projection of w . u, u having coefficients x in U.
/// Rows index F, columns index U.
SparseMatrix assemble_product_projection(const VectorEvaluator& w, const FESpace& U, const FESpace& F,
                                         const QuadratureSet& qs);

struct UpwindMomentum {
  /// alpha(i, j) = sum_e int_e alpha_e (n x [[rhou]]) [[phi_j x phi_i]]; applied to u_mid.
  SparseMatrix alpha;
  /// beta(i) = sum_e int_e (c2 / 2) sgn(u_mid . n) (phi_i . n) [[kdot]] . [[rho_mid]].
  Vector beta;
};

/// Edge upwinding terms of the momentum equation for frozen transport data.
/// The beta integrand is zero where u_mid . n = 0.
UpwindMomentum assemble_upwind_momentum(const VectorEvaluator& u_mid, const ScalarEvaluator& rho_mid,
                                        const VectorEvaluator& rhou_mid, const ScalarEvaluator& kdot,
                                        const UpwindConfig& cfg, const FESpace& U, const QuadratureSet& qs);

/// W with W(i, j) = sum_e int_e c1 sgn(u_mid . n) (n x [[rho phi_j]]) [[u x phi_i]]: the alpha
/// term as a function of the momentum jump.
SparseMatrix assemble_upwind_momentum_slot(const VectorEvaluator& u_mid, const ScalarEvaluator& rho,
                                           const DiscreteField& u, const UpwindConfig& cfg, const QuadratureSet& qs);

/// K with K c = UpwindMomentum::beta for kdot with coefficients c in F.
/// Rows index U, columns index F.
SparseMatrix assemble_upwind_kdot(const VectorEvaluator& u_mid, const ScalarEvaluator& rho_mid,
                                  const UpwindConfig& cfg, const FESpace& F, const FESpace& U,
                                  const QuadratureSet& qs);

/// S with sigma^T S rho = sum_e int_e c2 |u . n| [[sigma]] . [[rho]]. Symmetric PSD.
SparseMatrix assemble_upwind_density(const VectorEvaluator& u_mid, const UpwindConfig& cfg, const FESpace& F,
                                     const QuadratureSet& qs);

/// f(i) = <g rho, phi_i>.
Vector assemble_body_force(const Vec2& g, const ScalarEvaluator& rho, const FESpace& U, const QuadratureSet& qs);

} // namespace vdfem
