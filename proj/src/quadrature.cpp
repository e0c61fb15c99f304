#include "vdfem/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>

namespace vdfem {

namespace {

void check_degree(int degree, const char* what) {
  if (degree < 0 || degree > kMaxQuadratureDegree)
    throw Error(std::string(what) + ": degree " + std::to_string(degree) +
                " outside supported range [0, " + std::to_string(kMaxQuadratureDegree) + "]");
}

} // namespace

void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights) {
  // Symmetric tridiagonal Jacobi matrix of the monic recurrence.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int i = 0; i < n; ++i) {
    const double k = i;
    const double denom = (2 * k + ab) * (2 * k + ab + 2);
    J(i, i) = denom == 0.0 ? (beta - alpha) / (ab + 2) : (beta * beta - alpha * alpha) / denom;
    if (i + 1 < n) {
      const double m = i + 1;
      const double num = 4 * m * (m + alpha) * (m + beta) * (m + ab);
      const double den = (2 * m + ab) * (2 * m + ab) * (2 * m + ab + 1) * (2 * m + ab - 1);
      J(i, i + 1) = J(i + 1, i) = std::sqrt(num / den);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  const double mu0 = std::pow(2.0, ab + 1) * std::tgamma(alpha + 1) * std::tgamma(beta + 1) /
                     std::tgamma(ab + 2);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = eig.eigenvalues()(i);
    const double v = eig.eigenvectors()(0, i);
    weights[i] = mu0 * v * v;
  }
}

TriangleRule triangle_rule(int degree) {
  check_degree(degree, "triangle_rule");
  // x = u (1 - v), y = v; the Jacobian factor (1 - v) is absorbed by the
  // Gauss-Jacobi(1, 0) weight in v.
  const int n = std::max(1, (degree + 2) / 2);
  std::vector<double> gu, wu, gv, wv;
  gauss_jacobi(n, 0.0, 0.0, gu, wu);
  gauss_jacobi(n, 1.0, 0.0, gv, wv);

  TriangleRule rule;
  rule.exact_degree = std::max(degree, 2 * n - 1);
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j) {
    const double v = 0.5 * (gv[j] + 1.0);
    for (int i = 0; i < n; ++i) {
      const double u = 0.5 * (gu[i] + 1.0);
      rule.points.emplace_back(u * (1.0 - v), v);
      // du dv maps from [-1,1]^2 with factor 1/4 and (1-t) = 2(1-v)
      rule.weights.push_back(wu[i] * wv[j] * 0.125);
    }
  }
  if (n == 1) {
    rule.points[0] = Vec2(1.0 / 3.0, 1.0 / 3.0);
    rule.weights[0] = 0.5;
  }
  return rule;
}

IntervalRule interval_rule(int degree) {
  check_degree(degree, "interval_rule");
  const int n = std::max(1, (degree + 2) / 2);
  std::vector<double> g, w;
  gauss_jacobi(n, 0.0, 0.0, g, w);
  IntervalRule rule;
  rule.exact_degree = std::max(degree, 2 * n - 1);
  for (int i = 0; i < n; ++i) {
    rule.points.push_back(0.5 * (g[i] + 1.0));
    rule.weights.push_back(0.5 * w[i]);
  }
  if (n == 1) {
    rule.points[0] = 0.5;
    rule.weights[0] = 1.0;
  }
  return rule;
}

} // namespace vdfem
