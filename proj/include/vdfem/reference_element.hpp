#pragma once

#include "vdfem/common.hpp"

#include <array>
#include <span>
#include <vector>

namespace vdfem {

inline int num_monomials(int degree) { return (degree + 1) * (degree + 2) / 2; }

/// Values and first derivatives of x^a y^b for a + b <= degree, ordered by total
/// degree and then by increasing power of y.
void eval_monomials(int degree, const Vec2& x, double* value, double* dx, double* dy);

/// Shifted Legendre polynomial P_k(2t - 1) on [0, 1].
double shifted_legendre(int k, double t);

/// Tabulated scalar basis: rows are points, columns basis functions; derivatives
/// are with respect to reference coordinates.
struct ScalarTable {
  DenseMatrix value, dx, dy;
};

/// Tabulated vector basis. value[c](q, i) is component c of basis i at point q;
/// grad[c][d](q, i) its derivative along reference coordinate d.
struct VectorTable {
  std::array<DenseMatrix, 2> value;
  std::array<std::array<DenseMatrix, 2>, 2> grad;
};

/// Basis of P_m on the reference triangle, orthonormal in L2(reference triangle).
class ScalarReferenceBasis {
public:
  explicit ScalarReferenceBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return num_monomials(degree_); }
  ScalarTable tabulate(std::span<const Vec2> points) const;

private:
  int degree_;
  DenseMatrix coeffs_; // basis i = sum_j coeffs_(i, j) monomial_j
};

enum class VectorFamily { RT, BDM };

/// Vector polynomial stored as monomial coefficients per component.
struct VecPoly {
  Vector c[2];
};

/// Reference RT_s or BDM_k basis, dual to the moment functionals
///   edge i, k:  int_{edge i} (u . n) P_k ds       (outward n, counterclockwise parameter)
///   interior:   int_K u . q dx                    (q in P_{s-1}^2 for RT, NED1_{k-1} for BDM)
/// Edge i runs from vertex (i+1)%3 to (i+2)%3 of (0,0), (1,0), (0,1).
class VectorReferenceBasis {
public:
  /// `degree` is s for RT_s and k for BDM_k.
  VectorReferenceBasis(VectorFamily family, int degree);

  VectorFamily family() const { return family_; }
  int degree() const { return degree_; }
  /// Largest total polynomial degree of any component.
  int poly_degree() const { return poly_degree_; }
  int size() const { return static_cast<int>(coeffs_[0].rows()); }
  int dofs_per_edge() const { return dofs_per_edge_; }
  int interior_dofs() const { return size() - 3 * dofs_per_edge_; }

  /// Index of the basis function dual to moment k on local edge i.
  int edge_dof(int local_edge, int k) const { return local_edge * dofs_per_edge_ + k; }

  VectorTable tabulate(std::span<const Vec2> points) const;

  /// Values of the interior moment test functions at a reference point.
  std::vector<Vec2> interior_tests(const Vec2& x) const;

  /// Condition number of the moment (Vandermonde) matrix used to build the basis.
  double moment_condition() const { return condition_; }

private:
  VectorFamily family_;
  int degree_;
  int poly_degree_;
  int dofs_per_edge_;
  std::vector<VecPoly> interior_tests_;
  std::array<DenseMatrix, 2> coeffs_; // component c of basis i = sum_j coeffs_[c](i, j) mono_j
  double condition_ = 0.0;
};

/// Reference vertices and the counterclockwise local edge endpoints.
inline const std::array<Vec2, 3>& reference_vertices() {
  static const std::array<Vec2, 3> v{Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  return v;
}

} // namespace vdfem
