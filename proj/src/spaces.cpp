#include "vdfem/spaces.hpp"

#include "vdfem/assembly.hpp"
#include "vdfem/linsolve.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <atomic>
#include <cmath>

namespace vdfem {

const char* to_string(SpaceKind kind) {
  switch (kind) {
  case SpaceKind::RT:
    return "RT";
  case SpaceKind::BDM:
    return "BDM";
  case SpaceKind::DG:
    return "DG";
  }
  return "?";
}

QuadratureSet::QuadratureSet(int volume_degree, int edge_degree)
    : volume_(triangle_rule(volume_degree)), edge_(interval_rule(edge_degree)) {
  static std::atomic<int> counter{0};
  id_ = counter++;
  sets_[kVolume] = volume_.points;
  const auto& rv = reference_vertices();
  for (int le = 0; le < 3; ++le) {
    const Vec2 p = rv[(le + 1) % 3];
    const Vec2 q = rv[(le + 2) % 3];
    for (bool forward : {true, false}) {
      auto& pts = sets_[edge_set(le, forward)];
      for (double t : edge_.points) {
        const double s = forward ? t : 1.0 - t;
        pts.push_back(p + s * (q - p));
      }
    }
  }
}

EdgeTrace edge_trace(const Mesh& mesh, int e, int side) {
  const Edge& edge = mesh.edge(e);
  const int k = edge.elements[side];
  if (k < 0)
    throw Error("edge_trace: edge " + std::to_string(e) + " has no second side");
  const auto& le_map = mesh.element_edges(k);
  const int le = static_cast<int>(std::find(le_map.begin(), le_map.end(), e) - le_map.begin());
  const bool forward = mesh.triangles()[k][(le + 1) % 3] == edge.vertices[0];
  return {k, le, forward, QuadratureSet::edge_set(le, forward)};
}

// ---------------------------------------------------------------------------

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, SpaceKind kind, int degree)
    : mesh_(std::move(mesh)), kind_(kind), degree_(degree) {
  const Mesh& M = *mesh_;
  const int ne = M.num_elements();
  if (kind == SpaceKind::DG) {
    scalar_ = std::make_unique<ScalarReferenceBasis>(degree);
    local_dim_ = scalar_->size();
    global_dim_ = ne * local_dim_;
    dof_map_.resize(static_cast<std::size_t>(global_dim_));
    for (int i = 0; i < global_dim_; ++i)
      dof_map_[i] = i;
    signs_.assign(dof_map_.size(), 1.0);
    constrained_mask_.assign(global_dim_, false);
    return;
  }

  vector_ = std::make_unique<VectorReferenceBasis>(
      kind == SpaceKind::RT ? VectorFamily::RT : VectorFamily::BDM, degree);
  const int dpe = vector_->dofs_per_edge();
  const int nint = vector_->interior_dofs();
  local_dim_ = vector_->size();
  global_dim_ = M.num_edges() * dpe + ne * nint;
  dof_map_.resize(static_cast<std::size_t>(ne) * local_dim_);
  signs_.resize(dof_map_.size());
  for (int k = 0; k < ne; ++k) {
    for (int le = 0; le < 3; ++le) {
      const int e = M.element_edges(k)[le];
      const Edge& edge = M.edge(e);
      const double normal_sign = edge.elements[0] == k ? 1.0 : -1.0;
      const bool forward = M.triangles()[k][(le + 1) % 3] == edge.vertices[0];
      for (int j = 0; j < dpe; ++j) {
        const std::size_t loc = static_cast<std::size_t>(k) * local_dim_ + vector_->edge_dof(le, j);
        dof_map_[loc] = e * dpe + j;
        signs_[loc] = normal_sign * ((forward || j % 2 == 0) ? 1.0 : -1.0);
      }
    }
    for (int i = 0; i < nint; ++i) {
      const std::size_t loc = static_cast<std::size_t>(k) * local_dim_ + 3 * dpe + i;
      dof_map_[loc] = M.num_edges() * dpe + k * nint + i;
      signs_[loc] = 1.0;
    }
  }
  constrained_mask_.assign(global_dim_, false);
  for (int e : M.boundary_edges())
    for (int j = 0; j < dpe; ++j) {
      constrained_.push_back(e * dpe + j);
      constrained_mask_[e * dpe + j] = true;
    }
  std::sort(constrained_.begin(), constrained_.end());
}

int FESpace::poly_degree() const { return is_vector() ? vector_->poly_degree() : degree_; }

const FESpace::Tables& FESpace::tables(const QuadratureSet& qs) const {
  std::lock_guard lock(cache_mutex_);
  auto& slot = cache_[qs.id()];
  if (!slot) {
    slot = std::make_unique<Tables>();
    for (int set = 0; set < 7; ++set) {
      if (is_vector())
        slot->vector[set] = vector_->tabulate(qs.points(set));
      else
        slot->scalar[set] = scalar_->tabulate(qs.points(set));
    }
  }
  return *slot;
}

const FESpace::Mapped& FESpace::mapped(const QuadratureSet& qs) const {
  const Tables& t = tables(qs);
  std::lock_guard lock(cache_mutex_);
  auto& slot = mapped_cache_[qs.id()];
  if (!slot) {
    auto m = std::make_unique<Mapped>();
    const int ne = mesh_->num_elements();
    if (is_vector()) {
      m->vector_volume.resize(ne);
      m->vector_edge.resize(ne);
      for (int k = 0; k < ne; ++k) {
        map_vector(*this, k, t.vector[QuadratureSet::kVolume], true, m->vector_volume[k]);
        for (int le = 0; le < 3; ++le)
          map_vector(*this, k, t.vector[edge_set_of(k, le)], false, m->vector_edge[k][le]);
      }
    } else {
      m->scalar_volume.resize(ne);
      for (int k = 0; k < ne; ++k)
        map_scalar(*this, k, t.scalar[QuadratureSet::kVolume], true, m->scalar_volume[k]);
    }
    slot = std::move(m);
  }
  return *slot;
}

int FESpace::edge_set_of(int k, int le) const {
  const Edge& edge = mesh_->edge(mesh_->element_edges(k)[le]);
  return QuadratureSet::edge_set(le, mesh_->triangles()[k][(le + 1) % 3] == edge.vertices[0]);
}

const PhysicalVector& FESpace::mapped_vector(const QuadratureSet& qs, int k, int set) const {
  const Mapped& m = mapped(qs);
  if (set == QuadratureSet::kVolume)
    return m.vector_volume[k];
  const int le = (set - 1) / 2;
  if (edge_set_of(k, le) != set)
    throw Error("mapped_vector: set does not belong to this element's edge");
  return m.vector_edge[k][le];
}

const PhysicalScalar& FESpace::mapped_scalar(const QuadratureSet& qs, int k) const {
  return mapped(qs).scalar_volume[k];
}

std::shared_ptr<const FESpace> build_space(std::shared_ptr<const Mesh> mesh, SpaceKind kind, int degree) {
  const auto [lo, hi] = [kind]() -> std::pair<int, int> {
    switch (kind) {
    case SpaceKind::RT:
      return {0, 2};
    case SpaceKind::BDM:
      return {1, 3};
    default:
      return {0, 4};
    }
  }();
  if (degree < lo || degree > hi)
    throw Error(std::string("build_space: unsupported ") + to_string(kind) + " degree " +
                std::to_string(degree) + " (supported " + std::to_string(lo) + ".." + std::to_string(hi) + ")");
  return std::make_shared<const FESpace>(std::move(mesh), kind, degree);
}

// ---------------------------------------------------------------------------

DiscreteField::DiscreteField(std::shared_ptr<const FESpace> space)
    : space_(std::move(space)), coeffs_(Vector::Zero(space_->global_dim())) {}

DiscreteField::DiscreteField(std::shared_ptr<const FESpace> space, Vector coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != space_->global_dim())
    throw Error("DiscreteField: coefficient vector length does not match space dimension");
}

Vector DiscreteField::local_coeffs(int k) const {
  const auto dofs = space_->dofs(k);
  Vector c(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i)
    c(i) = coeffs_(dofs[i]);
  return c;
}

// ---------------------------------------------------------------------------

void map_scalar(const FESpace& space, int k, const ScalarTable& ref, bool with_grad, PhysicalScalar& out) {
  out.value = ref.value;
  if (!with_grad)
    return;
  const Mat2& Ji = space.mesh().geometry(k).inverse;
  out.gx = Ji(0, 0) * ref.dx + Ji(1, 0) * ref.dy;
  out.gy = Ji(0, 1) * ref.dx + Ji(1, 1) * ref.dy;
}

void map_vector(const FESpace& space, int k, const VectorTable& ref, bool with_grad, PhysicalVector& out) {
  const auto& g = space.mesh().geometry(k);
  const auto sg = space.signs(k);
  const Eigen::Map<const Vector> sv(sg.data(), static_cast<Eigen::Index>(sg.size()));
  const auto S = sv.asDiagonal();
  const double inv_det = 1.0 / g.det;
  const Mat2& J = g.jacobian;
  for (int a = 0; a < 2; ++a)
    out.value[a] = (inv_det * (J(a, 0) * ref.value[0] + J(a, 1) * ref.value[1])) * S;
  out.div = (inv_det * (ref.grad[0][0] + ref.grad[1][1])) * S;
  if (!with_grad)
    return;
  const Mat2& Ji = g.inverse;
  for (int a = 0; a < 2; ++a) {
    // d(J uhat)_a / d xhat_d
    const DenseMatrix h0 = J(a, 0) * ref.grad[0][0] + J(a, 1) * ref.grad[1][0];
    const DenseMatrix h1 = J(a, 0) * ref.grad[0][1] + J(a, 1) * ref.grad[1][1];
    for (int b = 0; b < 2; ++b)
      out.grad[a][b] = (inv_det * (h0 * Ji(0, b) + h1 * Ji(1, b))) * S;
  }
}

std::vector<double> eval_scalar(const DiscreteField& f, int k, std::span<const Vec2> ref) {
  if (f.space().is_vector())
    throw Error("eval_scalar: field is vector-valued");
  const ScalarTable t = f.space().scalar_basis().tabulate(ref);
  const Vector v = t.value * f.local_coeffs(k);
  return {v.data(), v.data() + v.size()};
}

std::vector<Vec2> eval_gradient(const DiscreteField& f, int k, std::span<const Vec2> ref) {
  if (f.space().is_vector())
    throw Error("eval_gradient: field is vector-valued");
  PhysicalScalar p;
  map_scalar(f.space(), k, f.space().scalar_basis().tabulate(ref), true, p);
  const Vector c = f.local_coeffs(k);
  const Vector gx = p.gx * c, gy = p.gy * c;
  std::vector<Vec2> out(ref.size());
  for (std::size_t q = 0; q < ref.size(); ++q)
    out[q] = Vec2(gx(q), gy(q));
  return out;
}

std::vector<Vec2> eval_vector(const DiscreteField& u, int k, std::span<const Vec2> ref) {
  if (!u.space().is_vector())
    throw Error("eval_vector: field is scalar-valued");
  PhysicalVector p;
  map_vector(u.space(), k, u.space().vector_basis().tabulate(ref), false, p);
  const Vector c = u.local_coeffs(k);
  const Vector vx = p.value[0] * c, vy = p.value[1] * c;
  std::vector<Vec2> out(ref.size());
  for (std::size_t q = 0; q < ref.size(); ++q)
    out[q] = Vec2(vx(q), vy(q));
  return out;
}

std::vector<double> eval_divergence(const DiscreteField& u, int k, std::span<const Vec2> ref) {
  if (!u.space().is_vector())
    throw Error("eval_divergence: field is scalar-valued");
  PhysicalVector p;
  map_vector(u.space(), k, u.space().vector_basis().tabulate(ref), false, p);
  const Vector d = p.div * u.local_coeffs(k);
  return {d.data(), d.data() + d.size()};
}

double eval_scalar_at(const DiscreteField& f, const Vec2& x) {
  const auto k = f.space().mesh().locate(x);
  if (!k)
    throw Error("eval_scalar_at: point outside mesh");
  const Vec2 r = f.space().mesh().to_reference(*k, x);
  return eval_scalar(f, *k, std::span<const Vec2>(&r, 1))[0];
}

Vec2 eval_vector_at(const DiscreteField& u, const Vec2& x) {
  const auto k = u.space().mesh().locate(x);
  if (!k)
    throw Error("eval_vector_at: point outside mesh");
  const Vec2 r = u.space().mesh().to_reference(*k, x);
  return eval_vector(u, *k, std::span<const Vec2>(&r, 1))[0];
}

Vector scalar_values(const DiscreteField& f, const QuadratureSet& qs, int k, int set) {
  return f.space().tables(qs).scalar[set].value * f.local_coeffs(k);
}

DenseMatrix vector_values(const DiscreteField& u, const QuadratureSet& qs, int k, int set) {
  const PhysicalVector& p = u.space().mapped_vector(qs, k, set);
  const Vector c = u.local_coeffs(k);
  DenseMatrix out(p.value[0].rows(), 2);
  out.col(0).noalias() = p.value[0] * c;
  out.col(1).noalias() = p.value[1] * c;
  return out;
}

ScalarEvaluator evaluator(const DiscreteField& f, const QuadratureSet& qs) {
  return [&f, &qs](int k, int set) { return scalar_values(f, qs, k, set); };
}

VectorEvaluator vector_evaluator(const DiscreteField& u, const QuadratureSet& qs) {
  return [&u, &qs](int k, int set) { return vector_values(u, qs, k, set); };
}

ScalarEvaluator analytic(std::function<double(const Vec2&)> fn, const Mesh& mesh, const QuadratureSet& qs) {
  return [fn = std::move(fn), &mesh, &qs](int k, int set) {
    const auto pts = qs.points(set);
    Vector out(pts.size());
    for (std::size_t q = 0; q < pts.size(); ++q)
      out(q) = fn(mesh.to_physical(k, pts[q]));
    return out;
  };
}

VectorEvaluator analytic_vector(std::function<Vec2(const Vec2&)> fn, const Mesh& mesh, const QuadratureSet& qs) {
  return [fn = std::move(fn), &mesh, &qs](int k, int set) {
    const auto pts = qs.points(set);
    DenseMatrix out(pts.size(), 2);
    for (std::size_t q = 0; q < pts.size(); ++q)
      out.row(q) = fn(mesh.to_physical(k, pts[q])).transpose();
    return out;
  };
}

// ---------------------------------------------------------------------------

DiscreteField l2_project_scalar(const ScalarEvaluator& f, std::shared_ptr<const FESpace> target,
                                const QuadratureSet& qs) {
  if (target->is_vector())
    throw Error("l2_project_scalar: target must be a DG space");
  const FESpace& F = *target;
  const ScalarTable& t = F.tables(qs).scalar[QuadratureSet::kVolume];
  const auto& w = qs.volume().weights;
  const Eigen::Map<const Vector> wq(w.data(), static_cast<Eigen::Index>(w.size()));
  // Reference mass; the physical mass is det * this for affine elements.
  const DenseMatrix ref_mass = t.value.transpose() * wq.asDiagonal() * t.value;
  const Eigen::LLT<DenseMatrix> llt(ref_mass);
  if (llt.info() != Eigen::Success)
    throw Error("l2_project_scalar: singular element mass matrix (quadrature degree too low)");

  DiscreteField out(target);
  for (int k = 0; k < F.mesh().num_elements(); ++k) {
    const Vector fv = f(k, QuadratureSet::kVolume);
    const Vector local = llt.solve(t.value.transpose() * wq.cwiseProduct(fv));
    const auto dofs = F.dofs(k);
    for (int i = 0; i < F.local_dim(); ++i)
      out.coeffs()(dofs[i]) = local(i);
  }
  return out;
}

DiscreteField interpolate_vector(const std::function<Vec2(const Vec2&)>& fn,
                                 std::shared_ptr<const FESpace> space) {
  if (!space->is_vector())
    throw Error("interpolate_vector: target must be RT or BDM");
  const FESpace& U = *space;
  const Mesh& M = U.mesh();
  const auto& basis = U.vector_basis();
  const int dpe = basis.dofs_per_edge();
  const int nint = basis.interior_dofs();
  const int qdeg = std::min(kMaxQuadratureDegree, 2 * basis.poly_degree() + 6);
  const IntervalRule line = interval_rule(qdeg);
  const TriangleRule tri = triangle_rule(qdeg);

  DiscreteField out(space);
  for (int e = 0; e < M.num_edges(); ++e) {
    const Edge& edge = M.edge(e);
    const Vec2 a = M.vertices()[edge.vertices[0]];
    const Vec2 b = M.vertices()[edge.vertices[1]];
    for (int j = 0; j < dpe; ++j) {
      double m = 0.0;
      for (int q = 0; q < line.size(); ++q) {
        const double t = line.points[q];
        m += line.weights[q] * fn(a + t * (b - a)).dot(edge.normal) * shifted_legendre(j, t);
      }
      out.coeffs()(e * dpe + j) = m * edge.length;
    }
  }
  for (int k = 0; k < M.num_elements() && nint > 0; ++k) {
    const auto& g = M.geometry(k);
    Vector m = Vector::Zero(nint);
    for (int q = 0; q < tri.size(); ++q) {
      const Vec2 uhat = g.det * (g.inverse * fn(M.to_physical(k, tri.points[q])));
      const auto tests = basis.interior_tests(tri.points[q]);
      for (int i = 0; i < nint; ++i)
        m(i) += tri.weights[q] * uhat.dot(tests[i]);
    }
    const auto dofs = U.dofs(k);
    for (int i = 0; i < nint; ++i)
      out.coeffs()(dofs[3 * dpe + i]) = m(i);
  }
  return out;
}

DiscreteField project_velocity_divfree(const VectorEvaluator& u0, std::shared_ptr<const FESpace> velocity,
                                       std::shared_ptr<const FESpace> pressure, const QuadratureSet& qs) {
  SaddleSystem sys;
  sys.velocity_block = assemble_mass(*velocity, qs);
  sys.divergence = assemble_div_coupling(*velocity, *pressure, qs);
  sys.rhs_u = assemble_vector_load(u0, *velocity, qs);
  sys.rhs_p = Vector::Zero(pressure->global_dim());
  sys.pressure_mean = pressure_mean_weights(*pressure, qs);
  sys.pressure_constant = constant_coefficients(*pressure, qs);
  sys.constrained = &velocity->constrained_dofs();
  const SaddleSolution sol = solve_saddle(sys);
  return DiscreteField(std::move(velocity), sol.u);
}

// ---------------------------------------------------------------------------

int scheme_volume_degree(int velocity_poly_degree, int density_degree) {
  const int d = velocity_poly_degree, m = density_degree;
  // w . (v . grad u) with w = rho u; rho u . v; (u . grad sigma) rho
  return std::min(kMaxQuadratureDegree, std::max({3 * d + m - 1, 2 * d + m, d + 2 * m - 1, 1}));
}

int scheme_edge_degree(int velocity_poly_degree, int density_degree) {
  const int d = velocity_poly_degree, m = density_degree;
  // {w} [[u x v]]; (u . n) [[f]] {g}
  return std::min(kMaxQuadratureDegree, std::max({3 * d + m, d + 2 * m, 1}));
}

bool product_projection_is_exact(SpaceKind velocity_kind, int s, int m) {
  return velocity_kind == SpaceKind::RT ? m >= 2 * s : m >= 2 * s + 2;
}

Discretization make_discretization(std::shared_ptr<const Mesh> mesh, SpaceKind velocity_kind, int s, int m) {
  if (velocity_kind == SpaceKind::DG)
    throw Error("make_discretization: velocity space must be RT or BDM");
  Discretization d;
  d.mesh = mesh;
  d.s = s;
  d.m = m;
  d.velocity = build_space(mesh, velocity_kind, velocity_kind == SpaceKind::RT ? s : s + 1);
  d.density = build_space(mesh, SpaceKind::DG, m);
  d.pressure = build_space(mesh, SpaceKind::DG, s);
  const int pu = d.velocity->poly_degree();
  d.quad = std::make_shared<const QuadratureSet>(scheme_volume_degree(pu, m), scheme_edge_degree(pu, m));
  return d;
}

} // namespace vdfem
