#include "vdfem/linsolve.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

namespace vdfem {

namespace {

constexpr double kResidualLimit = 1e-10;
constexpr int kMaxRefinement = 30;
// Stale factors are kept only if refinement reaches this relative residual.
constexpr double kReuseTarget = 1e-14;

using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

double norm_or_one(const Vector& b) {
  const double nb = b.norm();
  return nb > 0.0 ? nb : 1.0;
}

void factorize(LU& lu, const SparseMatrix& A, const char* who) {
  lu.compute(A);
  if (lu.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << who << ": factorization failed (" << lu.lastErrorMessage() << "), n = " << A.rows();
    throw SolverError(msg.str());
  }
}

// Refines x while each correction at least halves the residual; returns the
// final relative residual.
double refine(const LU& lu, const SparseMatrix& A, const Vector& b, Vector& x) {
  const double nb = norm_or_one(b);
  Vector r = b - A * x;
  double res = r.norm() / nb;
  for (int it = 0; it < kMaxRefinement && res > 0.0; ++it) {
    const Vector trial = x + lu.solve(r);
    const Vector rt = b - A * trial;
    const double next = rt.norm() / nb;
    if (std::isfinite(next) && next < res) {
      x = trial;
      r = rt;
    }
    if (!std::isfinite(next) || next > 0.5 * res)
      return std::min(res, next);
    res = next;
  }
  return res;
}

void check_residual(double res, const Vector& x, const char* who, Eigen::Index n) {
  if (!std::isfinite(res) || !x.allFinite() || res > kResidualLimit) {
    std::ostringstream msg;
    msg << who << ": relative residual " << res << " exceeds " << kResidualLimit << " (n = " << n << ")";
    throw SolverError(msg.str());
  }
}

} // namespace

struct ReusableLU::Impl {
  LU lu;
  Eigen::Index n = -1;
};

ReusableLU::ReusableLU() : impl_(std::make_unique<Impl>()) {}
ReusableLU::~ReusableLU() = default;

Vector ReusableLU::solve(const SparseMatrix& A, const Vector& b, const Vector& guess, const char* who,
                         double* residual) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw SolverError(std::string(who) + ": dimension mismatch");
  bool fresh = false;
  if (impl_->n != A.rows()) {
    factorize(impl_->lu, A, who);
    impl_->n = A.rows();
    ++factorizations_;
    fresh = true;
  }
  Vector x = guess.size() == b.size() && guess.allFinite() ? guess : Vector(impl_->lu.solve(b));
  double res = refine(impl_->lu, A, b, x);
  if (!fresh && !(res <= kReuseTarget)) {
    factorize(impl_->lu, A, who);
    ++factorizations_;
    if (!x.allFinite())
      x = impl_->lu.solve(b);
    res = refine(impl_->lu, A, b, x);
  }
  check_residual(res, x, who, A.rows());
  if (residual)
    *residual = res;
  return x;
}

Vector solve_sparse(const SparseMatrix& A, const Vector& rhs) {
  if (A.rows() != A.cols() || A.rows() != rhs.size())
    throw SolverError("solve_sparse: dimension mismatch");
  SparseMatrix Ac = A;
  Ac.makeCompressed();
  LU lu;
  factorize(lu, Ac, "solve_sparse");
  Vector x = lu.solve(rhs);
  const double res = refine(lu, Ac, rhs, x);
  check_residual(res, x, "solve_sparse", A.rows());
  return x;
}

SaddleSolution solve_saddle(const SaddleSystem& sys, ReusableLU* cache, const SaddleSolution* guess) {
  const int nu = static_cast<int>(sys.velocity_block.rows());
  const int np = static_cast<int>(sys.divergence.rows());
  if (sys.velocity_block.cols() != nu || sys.divergence.cols() != nu || sys.rhs_u.size() != nu ||
      sys.rhs_p.size() != np || sys.pressure_mean.size() != np || sys.pressure_constant.size() != np || np == 0)
    throw SolverError("solve_saddle: inconsistent dimensions");

  int pinned = 0;
  sys.pressure_constant.cwiseAbs().maxCoeff(&pinned);
  const double c_pin = sys.pressure_constant(pinned);
  if (c_pin == 0.0)
    throw SolverError("solve_saddle: pressure_constant is zero");
  if (std::abs(sys.pressure_constant.dot(sys.rhs_p)) > 1e-12 * (1.0 + sys.rhs_p.norm()) * sys.pressure_constant.norm())
    throw SolverError("solve_saddle: divergence data incompatible with the boundary condition");

  // Compact numbering: free velocity DOFs, then pressure DOFs except `pinned`.
  std::vector<int> free_index(nu, -1);
  int nf = 0;
  {
    std::size_t c = 0;
    const auto* cons = sys.constrained;
    for (int i = 0; i < nu; ++i) {
      if (cons && c < cons->size() && (*cons)[c] == i) {
        ++c;
        continue;
      }
      free_index[i] = nf++;
    }
  }
  auto p_index = [&](int i) { return i == pinned ? -1 : nf + (i < pinned ? i : i - 1); };
  const int n = nf + np - 1;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(sys.velocity_block.nonZeros() + 2 * sys.divergence.nonZeros());
  for (int j = 0; j < sys.velocity_block.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(sys.velocity_block, j); it; ++it) {
      const int r = free_index[it.row()], c = free_index[it.col()];
      if (r >= 0 && c >= 0)
        trips.emplace_back(r, c, it.value());
    }
  for (int j = 0; j < sys.divergence.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(sys.divergence, j); it; ++it) {
      const int c = free_index[it.col()];
      const int r = p_index(it.row());
      if (c < 0 || r < 0)
        continue;
      trips.emplace_back(r, c, it.value());
      trips.emplace_back(c, r, -it.value());
    }
  SparseMatrix K(n, n);
  K.setFromTriplets(trips.begin(), trips.end());
  K.makeCompressed();

  Vector b = Vector::Zero(n);
  for (int i = 0; i < nu; ++i)
    if (free_index[i] >= 0)
      b(free_index[i]) = sys.rhs_u(i);
  for (int i = 0; i < np; ++i)
    if (i != pinned)
      b(p_index(i)) = sys.rhs_p(i);

  Vector x0;
  if (guess && guess->u.size() == nu && guess->p.size() == np) {
    // Shift the guess so its pinned DOF is zero, matching the reduced unknowns.
    const Vector pg = guess->p - (guess->p(pinned) / c_pin) * sys.pressure_constant;
    x0 = Vector::Zero(n);
    for (int i = 0; i < nu; ++i)
      if (free_index[i] >= 0)
        x0(free_index[i]) = guess->u(i);
    for (int i = 0; i < np; ++i)
      if (i != pinned)
        x0(p_index(i)) = pg(i);
  }
  SaddleSolution sol;
  Vector x;
  if (cache)
    x = cache->solve(K, b, x0, "solve_saddle", &sol.residual);
  else {
    ReusableLU lu;
    x = lu.solve(K, b, x0, "solve_saddle", &sol.residual);
  }
  sol.u = Vector::Zero(nu);
  for (int i = 0; i < nu; ++i)
    if (free_index[i] >= 0)
      sol.u(i) = x(free_index[i]);
  sol.p = Vector::Zero(np);
  for (int i = 0; i < np; ++i)
    if (i != pinned)
      sol.p(i) = x(p_index(i));
  const double area = sys.pressure_mean.dot(sys.pressure_constant);
  sol.p -= (sys.pressure_mean.dot(sol.p) / area) * sys.pressure_constant;
  return sol;
}

} // namespace vdfem
