#include "vdfem/reference_element.hpp"

#include "vdfem/quadrature.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <vector>

namespace vdfem {

namespace {

int mono_index(int a, int b) {
  const int d = a + b;
  return (d == 0 ? 0 : num_monomials(d - 1)) + b;
}

Vec2 eval(const VecPoly& p, int degree, const Vec2& x) {
  std::vector<double> v(num_monomials(degree));
  eval_monomials(degree, x, v.data(), nullptr, nullptr);
  Vec2 r(0, 0);
  for (int j = 0; j < static_cast<int>(v.size()); ++j) {
    r.x() += p.c[0](j) * v[j];
    r.y() += p.c[1](j) * v[j];
  }
  return r;
}

} // namespace

void eval_monomials(int degree, const Vec2& x, double* value, double* dx, double* dy) {
  // powers of x and y
  double px[32], py[32];
  px[0] = py[0] = 1.0;
  for (int i = 1; i <= degree; ++i) {
    px[i] = px[i - 1] * x.x();
    py[i] = py[i - 1] * x.y();
  }
  int idx = 0;
  for (int d = 0; d <= degree; ++d)
    for (int b = 0; b <= d; ++b, ++idx) {
      const int a = d - b;
      value[idx] = px[a] * py[b];
      if (dx)
        dx[idx] = a > 0 ? a * px[a - 1] * py[b] : 0.0;
      if (dy)
        dy[idx] = b > 0 ? b * px[a] * py[b - 1] : 0.0;
    }
}

double shifted_legendre(int k, double t) {
  const double x = 2.0 * t - 1.0;
  double p0 = 1.0, p1 = x;
  if (k == 0)
    return p0;
  for (int n = 1; n < k; ++n) {
    const double p2 = ((2 * n + 1) * x * p1 - n * p0) / (n + 1);
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

ScalarReferenceBasis::ScalarReferenceBasis(int degree) : degree_(degree) {
  if (degree < 0)
    throw Error("ScalarReferenceBasis: negative degree");
  const int n = size();
  const TriangleRule rule = triangle_rule(std::min(2 * degree, kMaxQuadratureDegree));
  DenseMatrix gram = DenseMatrix::Zero(n, n);
  std::vector<double> v(n);
  for (int q = 0; q < rule.size(); ++q) {
    eval_monomials(degree, rule.points[q], v.data(), nullptr, nullptr);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        gram(i, j) += rule.weights[q] * v[i] * v[j];
  }
  Eigen::LLT<DenseMatrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw Error("ScalarReferenceBasis: singular monomial Gram matrix");
  const DenseMatrix L = llt.matrixL();
  coeffs_ = L.triangularView<Eigen::Lower>().solve(DenseMatrix::Identity(n, n));
}

ScalarTable ScalarReferenceBasis::tabulate(std::span<const Vec2> points) const {
  const int nq = static_cast<int>(points.size());
  const int nm = num_monomials(degree_);
  DenseMatrix mv(nq, nm), mx(nq, nm), my(nq, nm);
  std::vector<double> v(nm), dx(nm), dy(nm);
  for (int q = 0; q < nq; ++q) {
    eval_monomials(degree_, points[q], v.data(), dx.data(), dy.data());
    for (int j = 0; j < nm; ++j) {
      mv(q, j) = v[j];
      mx(q, j) = dx[j];
      my(q, j) = dy[j];
    }
  }
  ScalarTable t;
  t.value = mv * coeffs_.transpose();
  t.dx = mx * coeffs_.transpose();
  t.dy = my * coeffs_.transpose();
  return t;
}

VectorReferenceBasis::VectorReferenceBasis(VectorFamily family, int degree)
    : family_(family), degree_(degree) {
  if (family == VectorFamily::RT) {
    if (degree < 0)
      throw Error("VectorReferenceBasis: RT degree must be >= 0");
    poly_degree_ = degree + 1;
    dofs_per_edge_ = degree + 1;
  } else {
    if (degree < 1)
      throw Error("VectorReferenceBasis: BDM degree must be >= 1");
    poly_degree_ = degree;
    dofs_per_edge_ = degree + 1;
  }
  const int nm = num_monomials(poly_degree_);

  // Prime basis of the local space.
  std::vector<VecPoly> prime;
  auto unit = [nm](int comp, int mono) {
    VecPoly p;
    p.c[0] = Vector::Zero(nm);
    p.c[1] = Vector::Zero(nm);
    p.c[comp](mono) = 1.0;
    return p;
  };
  for (int j = 0; j < num_monomials(degree); ++j)
    for (int c = 0; c < 2; ++c)
      prime.push_back(unit(c, j));
  if (family == VectorFamily::RT) {
    // x * homogeneous P_s
    for (int b = 0; b <= degree; ++b) {
      const int a = degree - b;
      VecPoly p;
      p.c[0] = Vector::Zero(nm);
      p.c[1] = Vector::Zero(nm);
      p.c[0](mono_index(a + 1, b)) = 1.0;
      p.c[1](mono_index(a, b + 1)) = 1.0;
      prime.push_back(p);
    }
  }
  const int n = static_cast<int>(prime.size());

  // Interior test functions (monomial coefficients up to poly_degree_).
  std::vector<VecPoly>& interior = interior_tests_;
  if (family == VectorFamily::RT) {
    for (int j = 0; j < num_monomials(degree - 1) && degree >= 1; ++j)
      for (int c = 0; c < 2; ++c)
        interior.push_back(unit(c, j));
  } else if (degree >= 2) {
    for (int j = 0; j < num_monomials(degree - 2); ++j)
      for (int c = 0; c < 2; ++c)
        interior.push_back(unit(c, j));
    // (-y, x) * homogeneous P_{k-2}
    for (int b = 0; b <= degree - 2; ++b) {
      const int a = degree - 2 - b;
      VecPoly p;
      p.c[0] = Vector::Zero(nm);
      p.c[1] = Vector::Zero(nm);
      p.c[0](mono_index(a, b + 1)) = -1.0;
      p.c[1](mono_index(a + 1, b)) = 1.0;
      interior.push_back(p);
    }
  }
  if (3 * dofs_per_edge_ + static_cast<int>(interior.size()) != n)
    throw Error("VectorReferenceBasis: moment count does not match space dimension");

  const int qdeg = std::min(2 * poly_degree_ + 1, kMaxQuadratureDegree);
  const IntervalRule line = interval_rule(qdeg);
  const TriangleRule tri = triangle_rule(qdeg);
  const auto& rv = reference_vertices();

  DenseMatrix V = DenseMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    int row = 0;
    for (int e = 0; e < 3; ++e) {
      const Vec2 p = rv[(e + 1) % 3];
      const Vec2 tangent = rv[(e + 2) % 3] - p;
      const Vec2 scaled_normal(tangent.y(), -tangent.x());
      for (int k = 0; k < dofs_per_edge_; ++k, ++row) {
        double m = 0.0;
        for (int q = 0; q < line.size(); ++q) {
          const double t = line.points[q];
          m += line.weights[q] * eval(prime[j], poly_degree_, p + t * tangent).dot(scaled_normal) *
               shifted_legendre(k, t);
        }
        V(row, j) = m;
      }
    }
    for (const auto& test : interior) {
      double m = 0.0;
      for (int q = 0; q < tri.size(); ++q)
        m += tri.weights[q] * eval(prime[j], poly_degree_, tri.points[q])
                                  .dot(eval(test, poly_degree_, tri.points[q]));
      V(row++, j) = m;
    }
  }

  Eigen::JacobiSVD<DenseMatrix> svd(V);
  const auto& sv = svd.singularValues();
  condition_ = sv(0) / sv(sv.size() - 1);
  if (!(sv(sv.size() - 1) > 1e-12 * sv(0)))
    throw Error("VectorReferenceBasis: moment functionals are not unisolvent");
  const DenseMatrix X = V.fullPivLu().inverse();

  for (int c = 0; c < 2; ++c) {
    DenseMatrix P(n, nm);
    for (int j = 0; j < n; ++j)
      P.row(j) = prime[j].c[c].transpose();
    coeffs_[c] = X.transpose() * P;
  }
}

std::vector<Vec2> VectorReferenceBasis::interior_tests(const Vec2& x) const {
  std::vector<Vec2> out;
  out.reserve(interior_tests_.size());
  for (const auto& p : interior_tests_)
    out.push_back(eval(p, poly_degree_, x));
  return out;
}

VectorTable VectorReferenceBasis::tabulate(std::span<const Vec2> points) const {
  const int nq = static_cast<int>(points.size());
  const int nm = num_monomials(poly_degree_);
  DenseMatrix mv(nq, nm), mx(nq, nm), my(nq, nm);
  std::vector<double> v(nm), dx(nm), dy(nm);
  for (int q = 0; q < nq; ++q) {
    eval_monomials(poly_degree_, points[q], v.data(), dx.data(), dy.data());
    for (int j = 0; j < nm; ++j) {
      mv(q, j) = v[j];
      mx(q, j) = dx[j];
      my(q, j) = dy[j];
    }
  }
  VectorTable t;
  for (int c = 0; c < 2; ++c) {
    const DenseMatrix ct = coeffs_[c].transpose();
    t.value[c] = mv * ct;
    t.grad[c][0] = mx * ct;
    t.grad[c][1] = my * ct;
  }
  return t;
}

} // namespace vdfem
