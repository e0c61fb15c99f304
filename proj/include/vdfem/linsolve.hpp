#pragma once

#include "vdfem/common.hpp"

#include <memory>
#include <vector>

namespace vdfem {

class SolverError : public Error {
public:
  using Error::Error;
};

/// Linearized velocity-pressure system
///   A u - D^T p = rhs_u   (free velocity rows)
///   D u         = rhs_p
/// with constrained velocity DOFs fixed at zero and the pressure made unique by
/// <p, 1> = 0. The constant pressure mode is removed by dropping the divergence
/// row with the largest weight in the constant function (redundant, since
/// sum_i c_i (D u)_i = int div u = 0) and pinning that pressure DOF; the mean
/// is subtracted afterwards. A dense mean constraint would ruin the LU fill.
struct SaddleSystem {
  SparseMatrix velocity_block; // A, nu x nu
  SparseMatrix divergence;     // D, np x nu
  Vector rhs_u;
  Vector rhs_p;                // must satisfy pressure_constant . rhs_p = 0
  Vector pressure_mean;        // int psi_i dx
  Vector pressure_constant;    // coefficients c of the constant 1 in Q_h
  const std::vector<int>* constrained = nullptr; // sorted velocity DOFs fixed at zero
};

struct SaddleSolution {
  Vector u;
  Vector p;
  /// ||K x - b|| / ||b|| of the augmented system (0 when b = 0).
  double residual = 0.0;
};

/// Sparse LU kept across calls. A x = b is solved by iterative refinement with
/// the stored factors; A is refactored when refinement stops contracting. The
/// result is driven to the refinement floor either way, so reuse only changes
/// the cost. Not thread-safe.
class ReusableLU {
public:
  ReusableLU();
  ~ReusableLU();
  ReusableLU(const ReusableLU&) = delete;
  ReusableLU& operator=(const ReusableLU&) = delete;

  /// `guess` may be empty. Throws SolverError when A is singular or the
  /// relative residual exceeds 1e-10.
  Vector solve(const SparseMatrix& A, const Vector& b, const Vector& guess, const char* who = "ReusableLU",
               double* residual = nullptr);

  int factorizations() const { return factorizations_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int factorizations_ = 0;
};

/// Direct sparse LU of the augmented saddle matrix. With `cache` the
/// factorization is reused across calls; `guess` seeds the refinement.
SaddleSolution solve_saddle(const SaddleSystem& sys, ReusableLU* cache = nullptr,
                            const SaddleSolution* guess = nullptr);

/// Solves A x = rhs by sparse LU with partial pivoting. Throws SolverError when
/// A is singular or the relative residual exceeds 1e-10.
Vector solve_sparse(const SparseMatrix& A, const Vector& rhs);

} // namespace vdfem
