#pragma once

#include "vdfem/common.hpp"
#include "vdfem/mesh.hpp"
#include "vdfem/quadrature.hpp"
#include "vdfem/reference_element.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

namespace vdfem {

enum class SpaceKind { RT, BDM, DG };

const char* to_string(SpaceKind kind);

/// Volume and edge rules plus the seven canonical reference point sets used by
/// every assembly routine:
///   set 0               volume points,
///   set 1 + 2 le + dir  edge points on local edge le; dir 0 when the local
///                       counterclockwise direction agrees with the edge's
///                       stored vertex order, 1 otherwise.
/// Edge point q of both sets of an edge maps to the same physical point
/// v0 + t_q (v1 - v0), so traces from K1 and K2 line up index by index.
class QuadratureSet {
public:
  QuadratureSet(int volume_degree, int edge_degree);

  static constexpr int kVolume = 0;
  static int edge_set(int local_edge, bool forward) { return 1 + 2 * local_edge + (forward ? 0 : 1); }

  const TriangleRule& volume() const { return volume_; }
  const IntervalRule& edge() const { return edge_; }
  std::span<const Vec2> points(int set) const { return sets_[set]; }
  int id() const { return id_; }

private:
  TriangleRule volume_;
  IntervalRule edge_;
  std::array<std::vector<Vec2>, 7> sets_;
  int id_;
};

/// Where an edge sits inside one of its elements.
struct EdgeTrace {
  int element;
  int local_edge;
  bool forward;
  int set;
};

/// Trace of edge e seen from side 0 (K1, or the only element on the boundary)
/// or side 1 (K2).
EdgeTrace edge_trace(const Mesh& mesh, int e, int side);

// ---------------------------------------------------------------------------
// Element-level physical tables

/// Physical scalar basis on one element: rows are points.
struct PhysicalScalar {
  DenseMatrix value, gx, gy;
};

/// Physical (Piola-mapped, signed) vector basis on one element: rows are points.
/// grad[a][b] = d u_a / d x_b.
struct PhysicalVector {
  std::array<DenseMatrix, 2> value;
  std::array<std::array<DenseMatrix, 2>, 2> grad;
  DenseMatrix div;
};

/// Finite element space on a mesh: RT_s, BDM_k (H(div)-conforming, contravariant
/// Piola) or DG_m (orthonormal per element).
///
/// Vector DOFs are numbered edge by edge (moment k of edge e is e * dofs_per_edge + k)
/// followed by element interiors. Each local basis function carries a sign so
/// that edge moments use the edge's stored normal and parameter direction.
class FESpace {
public:
  FESpace(std::shared_ptr<const Mesh> mesh, SpaceKind kind, int degree);
  FESpace(const FESpace&) = delete;
  FESpace& operator=(const FESpace&) = delete;

  SpaceKind kind() const { return kind_; }
  int degree() const { return degree_; }
  bool is_vector() const { return kind_ != SpaceKind::DG; }
  /// Largest total polynomial degree of the local shape functions.
  int poly_degree() const;

  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }

  int local_dim() const { return local_dim_; }
  int global_dim() const { return global_dim_; }
  int num_free() const { return global_dim_ - static_cast<int>(constrained_.size()); }

  std::span<const int> dofs(int k) const {
    return {dof_map_.data() + static_cast<std::size_t>(k) * local_dim_, static_cast<std::size_t>(local_dim_)};
  }
  std::span<const double> signs(int k) const {
    return {signs_.data() + static_cast<std::size_t>(k) * local_dim_, static_cast<std::size_t>(local_dim_)};
  }

  /// Boundary-normal velocity DOFs (sorted); empty for DG.
  const std::vector<int>& constrained_dofs() const { return constrained_; }
  bool is_constrained(int dof) const { return constrained_mask_[dof]; }

  const ScalarReferenceBasis& scalar_basis() const { return *scalar_; }
  const VectorReferenceBasis& vector_basis() const { return *vector_; }

  /// Reference tabulations on the point sets of `qs`, computed once per set.
  struct Tables {
    std::array<ScalarTable, 7> scalar;
    std::array<VectorTable, 7> vector;
  };
  const Tables& tables(const QuadratureSet& qs) const;

  /// Physical tables of every element on the point sets of `qs`, computed once.
  /// Volume tables carry gradients; edge tables (values only) are stored for
  /// the set each local edge actually uses.
  struct Mapped {
    std::vector<PhysicalScalar> scalar_volume;
    std::vector<PhysicalVector> vector_volume;
    std::vector<std::array<PhysicalVector, 3>> vector_edge;
  };
  const Mapped& mapped(const QuadratureSet& qs) const;
  /// Mapped vector table of element k on `set` (volume or one of its edge sets).
  const PhysicalVector& mapped_vector(const QuadratureSet& qs, int k, int set) const;
  const PhysicalScalar& mapped_scalar(const QuadratureSet& qs, int k) const;

private:
  int edge_set_of(int k, int le) const;

  std::shared_ptr<const Mesh> mesh_;
  SpaceKind kind_;
  int degree_;
  int local_dim_ = 0;
  int global_dim_ = 0;
  std::vector<int> dof_map_;
  std::vector<double> signs_;
  std::vector<int> constrained_;
  std::vector<bool> constrained_mask_;
  std::unique_ptr<ScalarReferenceBasis> scalar_;
  std::unique_ptr<VectorReferenceBasis> vector_;
  mutable std::mutex cache_mutex_;
  mutable std::map<int, std::unique_ptr<Tables>> cache_;
  mutable std::map<int, std::unique_ptr<Mapped>> mapped_cache_;
};

/// Supported degrees: RT 0..2, BDM 1..3, DG 0..4.
std::shared_ptr<const FESpace> build_space(std::shared_ptr<const Mesh> mesh, SpaceKind kind, int degree);

/// Coefficient vector bound to a space.
class DiscreteField {
public:
  explicit DiscreteField(std::shared_ptr<const FESpace> space);
  DiscreteField(std::shared_ptr<const FESpace> space, Vector coeffs);

  const FESpace& space() const { return *space_; }
  const std::shared_ptr<const FESpace>& space_ptr() const { return space_; }
  const Vector& coeffs() const { return coeffs_; }
  Vector& coeffs() { return coeffs_; }

  /// Global coefficients of element k's DOFs in local order; orientation
  /// signs live in the mapped basis (map_vector).
  Vector local_coeffs(int k) const;

private:
  std::shared_ptr<const FESpace> space_;
  Vector coeffs_;
};

void map_scalar(const FESpace& space, int k, const ScalarTable& ref, bool with_grad, PhysicalScalar& out);
void map_vector(const FESpace& space, int k, const VectorTable& ref, bool with_grad, PhysicalVector& out);

// ---------------------------------------------------------------------------
// Evaluation

/// Scalar values at arbitrary reference points of element k.
std::vector<double> eval_scalar(const DiscreteField& f, int k, std::span<const Vec2> ref);
/// Physical gradients of a scalar field.
std::vector<Vec2> eval_gradient(const DiscreteField& f, int k, std::span<const Vec2> ref);
/// Piola-mapped vector values at reference points of element k.
std::vector<Vec2> eval_vector(const DiscreteField& u, int k, std::span<const Vec2> ref);
std::vector<double> eval_divergence(const DiscreteField& u, int k, std::span<const Vec2> ref);

/// Evaluates a field at the physical point x (point location on the field's mesh).
double eval_scalar_at(const DiscreteField& f, const Vec2& x);
Vec2 eval_vector_at(const DiscreteField& u, const Vec2& x);

/// Closure-like fields evaluable element by element on the point sets of one
/// QuadratureSet. Scalar: nq values. Vector: nq x 2 matrix.
using ScalarEvaluator = std::function<Vector(int element, int set)>;
using VectorEvaluator = std::function<DenseMatrix(int element, int set)>;

/// Values of a discrete field on a point set.
Vector scalar_values(const DiscreteField& f, const QuadratureSet& qs, int k, int set);
DenseMatrix vector_values(const DiscreteField& u, const QuadratureSet& qs, int k, int set);

/// Evaluators borrowing `f`/`u` and `qs`; the referenced objects must outlive them.
ScalarEvaluator evaluator(const DiscreteField& f, const QuadratureSet& qs);
VectorEvaluator vector_evaluator(const DiscreteField& u, const QuadratureSet& qs);
ScalarEvaluator analytic(std::function<double(const Vec2&)> fn, const Mesh& mesh, const QuadratureSet& qs);
VectorEvaluator analytic_vector(std::function<Vec2(const Vec2&)> fn, const Mesh& mesh, const QuadratureSet& qs);

// ---------------------------------------------------------------------------
// Projections and interpolation

/// Element-wise L2 projection onto a DG space.
DiscreteField l2_project_scalar(const ScalarEvaluator& f, std::shared_ptr<const FESpace> target,
                                const QuadratureSet& qs);

/// Canonical moment interpolant of a physical vector field into RT/BDM.
/// Boundary DOFs are left as computed (not zeroed).
DiscreteField interpolate_vector(const std::function<Vec2(const Vec2&)>& fn,
                                 std::shared_ptr<const FESpace> space);

/// Minimizes ||u_h - u0|| over U_h subject to <div u_h, q> = 0 for all q in Q_h,
/// with boundary-normal DOFs fixed at zero.
DiscreteField project_velocity_divfree(const VectorEvaluator& u0, std::shared_ptr<const FESpace> velocity,
                                       std::shared_ptr<const FESpace> pressure, const QuadratureSet& qs);

// ---------------------------------------------------------------------------

/// The three spaces of the scheme on one mesh: U_h = RT_s or BDM_{s+1},
/// F_h = DG_m, Q_h = DG_s, and quadrature exact for every polynomial integrand.
struct Discretization {
  std::shared_ptr<const Mesh> mesh;
  std::shared_ptr<const FESpace> velocity;
  std::shared_ptr<const FESpace> density;
  std::shared_ptr<const FESpace> pressure;
  std::shared_ptr<const QuadratureSet> quad;

  int s = 0;
  int m = 0;
};

/// `velocity_kind` must be RT or BDM; s selects RT_s / BDM_{s+1} and Q_h = DG_s.
Discretization make_discretization(std::shared_ptr<const Mesh> mesh, SpaceKind velocity_kind, int s, int m);

/// Volume and edge quadrature degrees making every polynomial integrand of the
/// scheme exact (deg_u = full polynomial degree of U_h), capped at the largest
/// supported rule.
int scheme_volume_degree(int velocity_poly_degree, int density_degree);
int scheme_edge_degree(int velocity_poly_degree, int density_degree);

/// True when overline{u . v} = u . v for divergence-free u, v in U_h
/// (m >= 2s for RT_s, m >= 2s + 2 for BDM_{s+1}).
bool product_projection_is_exact(SpaceKind velocity_kind, int s, int m);

} // namespace vdfem
