#pragma once

#include "vdfem/common.hpp"
#include "vdfem/spaces.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace vdfem {

/// Discrete solution at one time level.
struct State {
  DiscreteField u;
  DiscreteField rho;
  DiscreteField p;
  double t = 0.0;
};

struct Conserved {
  double mass = 0.0;            // int rho
  double squared_density = 0.0; // int rho^2
  double energy = 0.0;          // int rho u . u
};

Conserved conserved_quantities(const DiscreteField& u, const DiscreteField& rho, const QuadratureSet& qs);
inline Conserved conserved_quantities(const State& s, const QuadratureSet& qs) {
  return conserved_quantities(s.u, s.rho, qs);
}

/// max |div u| over volume quadrature points.
double max_divergence(const DiscreteField& u, const QuadratureSet& qs);
/// min rho over volume quadrature points.
double min_value(const DiscreteField& rho, const QuadratureSet& qs);
double l2_norm(const DiscreteField& f, const QuadratureSet& qs);
/// (1/|Omega|) int f.
double mean_value(const DiscreteField& f, const QuadratureSet& qs);

struct StepRecord {
  double t = 0.0;
  double mass = 0.0;
  double squared_density = 0.0;
  double energy = 0.0;
  double min_rho = 0.0;
  double max_div = 0.0;
  int picard_iterations = 0;
  /// ||u||_{L2}; not part of the CSV.
  double u_norm = 0.0;
};

StepRecord make_record(const State& s, const QuadratureSet& qs, int picard_iterations);

/// One record per accepted step plus the initial state.
struct DiagnosticsSeries {
  std::vector<StepRecord> records;

  /// Header `t,M,F,E,min_rho,max_div,picard_iters`, one row per record.
  void write_csv(std::ostream& out) const;
};

/// L2 error against a pointwise reference evaluated on the field's own quadrature.
double l2_error(const DiscreteField& f, const std::function<double(const Vec2&)>& reference, const QuadratureSet& qs);
double l2_error(const DiscreteField& u, const std::function<Vec2(const Vec2&)>& reference, const QuadratureSet& qs);

/// ||coarse - fine|| integrated on the fine field's mesh with the fine quadrature;
/// the coarse field is evaluated by point location. With `remove_means` both
/// fields are shifted to zero mean first (pressure convention).
double l2_difference(const DiscreteField& coarse, const DiscreteField& fine, const QuadratureSet& fine_qs,
                     const QuadratureSet& coarse_qs, bool remove_means = false);

/// Rates log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
std::vector<double> observed_order(const std::vector<double>& errors, const std::vector<double>& hs);

} // namespace vdfem
