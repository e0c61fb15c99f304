#include "vdfem/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace vdfem {

namespace {

Vector volume_weights(const Mesh& mesh, int k, const QuadratureSet& qs) {
  const auto& w = qs.volume().weights;
  return mesh.geometry(k).det * Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
}

} // namespace

Conserved conserved_quantities(const DiscreteField& u, const DiscreteField& rho, const QuadratureSet& qs) {
  Conserved c;
  const Mesh& mesh = rho.space().mesh();
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector w = volume_weights(mesh, k, qs);
    const Vector r = scalar_values(rho, qs, k, QuadratureSet::kVolume);
    const DenseMatrix v = vector_values(u, qs, k, QuadratureSet::kVolume);
    c.mass += w.dot(r);
    c.squared_density += w.dot(r.cwiseAbs2());
    c.energy += w.dot(r.cwiseProduct(v.rowwise().squaredNorm()));
  }
  return c;
}

double max_divergence(const DiscreteField& u, const QuadratureSet& qs) {
  double m = 0.0;
  for (int k = 0; k < u.space().mesh().num_elements(); ++k) {
    const PhysicalVector& p = u.space().mapped_vector(qs, k, QuadratureSet::kVolume);
    m = std::max(m, (p.div * u.local_coeffs(k)).cwiseAbs().maxCoeff());
  }
  return m;
}

double min_value(const DiscreteField& rho, const QuadratureSet& qs) {
  double m = std::numeric_limits<double>::infinity();
  for (int k = 0; k < rho.space().mesh().num_elements(); ++k)
    m = std::min(m, scalar_values(rho, qs, k, QuadratureSet::kVolume).minCoeff());
  return m;
}

double l2_norm(const DiscreteField& f, const QuadratureSet& qs) {
  double s = 0.0;
  const Mesh& mesh = f.space().mesh();
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector w = volume_weights(mesh, k, qs);
    if (f.space().is_vector())
      s += w.dot(vector_values(f, qs, k, QuadratureSet::kVolume).rowwise().squaredNorm());
    else
      s += w.dot(scalar_values(f, qs, k, QuadratureSet::kVolume).cwiseAbs2());
  }
  return std::sqrt(s);
}

double mean_value(const DiscreteField& f, const QuadratureSet& qs) {
  double s = 0.0;
  const Mesh& mesh = f.space().mesh();
  for (int k = 0; k < mesh.num_elements(); ++k)
    s += volume_weights(mesh, k, qs).dot(scalar_values(f, qs, k, QuadratureSet::kVolume));
  return s / mesh.total_area();
}

StepRecord make_record(const State& s, const QuadratureSet& qs, int picard_iterations) {
  const Conserved c = conserved_quantities(s, qs);
  return {s.t, c.mass, c.squared_density, c.energy, min_value(s.rho, qs), max_divergence(s.u, qs), picard_iterations,
          l2_norm(s.u, qs)};
}

void DiagnosticsSeries::write_csv(std::ostream& out) const {
  out << "t,M,F,E,min_rho,max_div,picard_iters\n";
  out << std::setprecision(17);
  for (const auto& r : records)
    out << r.t << ',' << r.mass << ',' << r.squared_density << ',' << r.energy << ',' << r.min_rho << ','
        << r.max_div << ',' << r.picard_iterations << '\n';
}

double l2_error(const DiscreteField& f, const std::function<double(const Vec2&)>& reference, const QuadratureSet& qs) {
  const Mesh& mesh = f.space().mesh();
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector w = volume_weights(mesh, k, qs);
    const Vector v = scalar_values(f, qs, k, QuadratureSet::kVolume);
    const auto pts = qs.points(QuadratureSet::kVolume);
    for (int q = 0; q < v.size(); ++q) {
      const double d = v(q) - reference(mesh.to_physical(k, pts[q]));
      s += w(q) * d * d;
    }
  }
  return std::sqrt(s);
}

double l2_error(const DiscreteField& u, const std::function<Vec2(const Vec2&)>& reference, const QuadratureSet& qs) {
  const Mesh& mesh = u.space().mesh();
  double s = 0.0;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector w = volume_weights(mesh, k, qs);
    const DenseMatrix v = vector_values(u, qs, k, QuadratureSet::kVolume);
    const auto pts = qs.points(QuadratureSet::kVolume);
    for (int q = 0; q < v.rows(); ++q)
      s += w(q) * (v.row(q).transpose() - reference(mesh.to_physical(k, pts[q]))).squaredNorm();
  }
  return std::sqrt(s);
}

double l2_difference(const DiscreteField& coarse, const DiscreteField& fine, const QuadratureSet& fine_qs,
                     const QuadratureSet& coarse_qs, bool remove_means) {
  if (coarse.space().is_vector() != fine.space().is_vector())
    throw Error("l2_difference: fields of different rank");
  const bool vec = fine.space().is_vector();
  const double shift = remove_means && !vec ? mean_value(coarse, coarse_qs) - mean_value(fine, fine_qs) : 0.0;

  const Mesh& fm = fine.space().mesh();
  const Mesh& cm = coarse.space().mesh();
  const auto pts = fine_qs.points(QuadratureSet::kVolume);
  double s = 0.0;
  for (int k = 0; k < fm.num_elements(); ++k) {
    const Vector w = volume_weights(fm, k, fine_qs);
    // All quadrature points of a fine element lie in one coarse element when the
    // meshes are nested; locate each point anyway so non-nested meshes work.
    for (std::size_t q = 0; q < pts.size(); ++q) {
      const Vec2 x = fm.to_physical(k, pts[q]);
      const auto kc = cm.locate(x);
      if (!kc)
        throw Error("l2_difference: point location failed");
      const Vec2 r = cm.to_reference(*kc, x);
      const Vec2 rf = pts[q];
      if (vec) {
        const Vec2 d = eval_vector(coarse, *kc, std::span<const Vec2>(&r, 1))[0] -
                       eval_vector(fine, k, std::span<const Vec2>(&rf, 1))[0];
        s += w(q) * d.squaredNorm();
      } else {
        const double d = eval_scalar(coarse, *kc, std::span<const Vec2>(&r, 1))[0] -
                         eval_scalar(fine, k, std::span<const Vec2>(&rf, 1))[0] - shift;
        s += w(q) * d * d;
      }
    }
  }
  return std::sqrt(s);
}

std::vector<double> observed_order(const std::vector<double>& errors, const std::vector<double>& hs) {
  if (errors.size() != hs.size() || errors.size() < 2)
    throw Error("observed_order: need matching lists with at least two entries");
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!(errors[i] > 0.0) || !(hs[i] > 0.0))
      throw Error("observed_order: errors and mesh sizes must be positive");
  std::vector<double> rates;
  for (std::size_t i = 0; i + 1 < errors.size(); ++i)
    rates.push_back(std::log(errors[i] / errors[i + 1]) / std::log(hs[i] / hs[i + 1]));
  return rates;
}

} // namespace vdfem
