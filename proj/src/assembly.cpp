#include "vdfem/assembly.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <vector>

namespace vdfem {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void scatter(Triplets& trips, std::span<const int> rows, std::span<const int> cols, const DenseMatrix& local) {
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      trips.emplace_back(rows[i], cols[j], local(i, j));
}

void scatter(Vector& out, std::span<const int> rows, const Vector& local) {
  for (std::size_t i = 0; i < rows.size(); ++i)
    out(rows[i]) += local(i);
}

SparseMatrix finish(int rows, int cols, const Triplets& trips) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.prune(0.0);
  m.makeCompressed();
  return m;
}

/// det * quadrature weight on element k.
Vector volume_weights(const Mesh& mesh, int k, const QuadratureSet& qs) {
  const auto& w = qs.volume().weights;
  return mesh.geometry(k).det * Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
}

Vector edge_weights(const Edge& e, const QuadratureSet& qs) {
  const auto& w = qs.edge().weights;
  return e.length * Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
}

const ScalarTable& stab(const FESpace& F, const QuadratureSet& qs, int set) { return F.tables(qs).scalar[set]; }

void require_vector(const FESpace& U, const char* who) {
  if (!U.is_vector())
    throw Error(std::string(who) + ": expected an RT or BDM space");
}

void require_scalar(const FESpace& F, const char* who) {
  if (F.is_vector())
    throw Error(std::string(who) + ": expected a DG space");
}

/// Normal component of vector values (nq x 2).
Vector normal_component(const DenseMatrix& v, const Vec2& n) { return v.col(0) * n.x() + v.col(1) * n.y(); }

/// Normal component of a basis table given by its x and y component tables.
DenseMatrix normal_component(const DenseMatrix& vx, const DenseMatrix& vy, const Vec2& n) {
  return vx * n.x() + vy * n.y();
}

/// C(i, j) = sum_q c_q (phi_j x phi_i)(q).
DenseMatrix cross_matrix(const PhysicalVector& p, const Vector& c) {
  const auto D = c.asDiagonal();
  return p.value[1].transpose() * D * p.value[0] - p.value[0].transpose() * D * p.value[1];
}

} // namespace

void UpwindConfig::validate() const {
  if (!(c1 >= 0.0 && c1 <= 0.5) || !(c2 >= 0.0 && c2 <= 0.5))
    throw Error("UpwindConfig: c1 and c2 must lie in [0, 1/2]");
}

SparseMatrix assemble_mass(const FESpace& space, const QuadratureSet& qs) {
  const Mesh& mesh = space.mesh();
  Triplets trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_elements()) * space.local_dim() * space.local_dim());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector w = volume_weights(mesh, k, qs);
    DenseMatrix local;
    if (space.is_vector()) {
      const PhysicalVector& p = space.mapped_vector(qs, k, QuadratureSet::kVolume);
      local = p.value[0].transpose() * w.asDiagonal() * p.value[0] +
              p.value[1].transpose() * w.asDiagonal() * p.value[1];
    } else {
      const DenseMatrix& v = stab(space, qs, QuadratureSet::kVolume).value;
      local = v.transpose() * w.asDiagonal() * v;
    }
    scatter(trips, space.dofs(k), space.dofs(k), local);
  }
  return finish(space.global_dim(), space.global_dim(), trips);
}

SparseMatrix assemble_weighted_velocity_mass(const ScalarEvaluator& rho, const FESpace& U, const QuadratureSet& qs) {
  require_vector(U, "assemble_weighted_velocity_mass");
  const Mesh& mesh = U.mesh();
  Triplets trips;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector w = volume_weights(mesh, k, qs).cwiseProduct(rho(k, QuadratureSet::kVolume));
    const PhysicalVector& p = U.mapped_vector(qs, k, QuadratureSet::kVolume);
    const DenseMatrix local = p.value[0].transpose() * w.asDiagonal() * p.value[0] +
                              p.value[1].transpose() * w.asDiagonal() * p.value[1];
    scatter(trips, U.dofs(k), U.dofs(k), local);
  }
  return finish(U.global_dim(), U.global_dim(), trips);
}

SparseMatrix assemble_div_coupling(const FESpace& U, const FESpace& Q, const QuadratureSet& qs) {
  require_vector(U, "assemble_div_coupling");
  require_scalar(Q, "assemble_div_coupling");
  const Mesh& mesh = U.mesh();
  Triplets trips;
  const DenseMatrix& psi = stab(Q, qs, QuadratureSet::kVolume).value;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector w = volume_weights(mesh, k, qs);
    const PhysicalVector& p = U.mapped_vector(qs, k, QuadratureSet::kVolume);
    scatter(trips, Q.dofs(k), U.dofs(k), psi.transpose() * w.asDiagonal() * p.div);
  }
  return finish(Q.global_dim(), U.global_dim(), trips);
}

Vector pressure_mean_weights(const FESpace& Q, const QuadratureSet& qs) {
  require_scalar(Q, "pressure_mean_weights");
  Vector m = Vector::Zero(Q.global_dim());
  const DenseMatrix& psi = stab(Q, qs, QuadratureSet::kVolume).value;
  for (int k = 0; k < Q.mesh().num_elements(); ++k)
    scatter(m, Q.dofs(k), psi.transpose() * volume_weights(Q.mesh(), k, qs));
  return m;
}

Vector constant_coefficients(const FESpace& Q, const QuadratureSet& qs) {
  require_scalar(Q, "constant_coefficients");
  const DenseMatrix& psi = stab(Q, qs, QuadratureSet::kVolume).value;
  const auto& w = qs.volume().weights;
  const Eigen::Map<const Vector> wv(w.data(), static_cast<Eigen::Index>(w.size()));
  // Same reference element everywhere: solve the reference projection once.
  const DenseMatrix mass = psi.transpose() * wv.asDiagonal() * psi;
  const Vector local = mass.llt().solve(psi.transpose() * wv);
  Vector c(Q.global_dim());
  for (int k = 0; k < Q.mesh().num_elements(); ++k) {
    const auto dofs = Q.dofs(k);
    for (std::size_t i = 0; i < dofs.size(); ++i)
      c(dofs[i]) = local(static_cast<Eigen::Index>(i));
  }
  return c;
}

Vector assemble_vector_load(const VectorEvaluator& f, const FESpace& U, const QuadratureSet& qs) {
  require_vector(U, "assemble_vector_load");
  Vector out = Vector::Zero(U.global_dim());
  for (int k = 0; k < U.mesh().num_elements(); ++k) {
    const Vector w = volume_weights(U.mesh(), k, qs);
    const DenseMatrix fv = f(k, QuadratureSet::kVolume);
    const PhysicalVector& p = U.mapped_vector(qs, k, QuadratureSet::kVolume);
    scatter(out, U.dofs(k),
            p.value[0].transpose() * w.cwiseProduct(fv.col(0)) + p.value[1].transpose() * w.cwiseProduct(fv.col(1)));
  }
  return out;
}

Vector assemble_scalar_load(const ScalarEvaluator& f, const FESpace& F, const QuadratureSet& qs) {
  require_scalar(F, "assemble_scalar_load");
  Vector out = Vector::Zero(F.global_dim());
  const DenseMatrix& psi = stab(F, qs, QuadratureSet::kVolume).value;
  for (int k = 0; k < F.mesh().num_elements(); ++k)
    scatter(out, F.dofs(k), psi.transpose() * volume_weights(F.mesh(), k, qs).cwiseProduct(f(k, QuadratureSet::kVolume)));
  return out;
}

SparseMatrix assemble_a(const VectorEvaluator& w, const FESpace& U, const QuadratureSet& qs) {
  require_vector(U, "assemble_a");
  const Mesh& mesh = U.mesh();
  const int nl = U.local_dim();
  std::vector<DenseMatrix> local(mesh.num_elements(), DenseMatrix::Zero(nl, nl));

  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector wq = volume_weights(mesh, k, qs);
    const DenseMatrix wv = w(k, QuadratureSet::kVolume);
    const PhysicalVector& p = U.mapped_vector(qs, k, QuadratureSet::kVolume);
    // g_j = (grad phi_j)^T w; X(i, j) = int phi_i . g_j = int w . (phi_i . grad phi_j)
    DenseMatrix X = DenseMatrix::Zero(nl, nl);
    for (int b = 0; b < 2; ++b) {
      const DenseMatrix g = wv.col(0).asDiagonal() * p.grad[0][b] + wv.col(1).asDiagonal() * p.grad[1][b];
      X.noalias() += p.value[b].transpose() * wq.asDiagonal() * g;
    }
    local[k] = X - X.transpose();
  }

  for (int e : mesh.interior_edges()) {
    const Edge& edge = mesh.edge(e);
    const Vector we = edge_weights(edge, qs);
    const EdgeTrace t1 = edge_trace(mesh, e, 0);
    const EdgeTrace t2 = edge_trace(mesh, e, 1);
    const DenseMatrix avg = 0.5 * (w(t1.element, t1.set) + w(t2.element, t2.set));
    const Vector c = we.cwiseProduct(avg.col(1) * edge.normal.x() - avg.col(0) * edge.normal.y());
    const PhysicalVector& p_t1 = U.mapped_vector(qs, t1.element, t1.set);
    local[t1.element] += cross_matrix(p_t1, c);
    const PhysicalVector& p_t2 = U.mapped_vector(qs, t2.element, t2.set);
    local[t2.element] -= cross_matrix(p_t2, c);
  }

  Triplets trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_elements()) * nl * nl);
  for (int k = 0; k < mesh.num_elements(); ++k)
    scatter(trips, U.dofs(k), U.dofs(k), local[k]);
  return finish(U.global_dim(), U.global_dim(), trips);
}

namespace {

/// Rows q, columns i: (u x phi_i)(q) for vector values u (nq x 2).
DenseMatrix cross_with(const DenseMatrix& u, const PhysicalVector& p) {
  return u.col(0).asDiagonal() * p.value[1] - u.col(1).asDiagonal() * p.value[0];
}

/// Rows q, columns j: (n x phi_j)(q).
DenseMatrix normal_cross(const Vec2& n, const PhysicalVector& p) { return n.x() * p.value[1] - n.y() * p.value[0]; }

} // namespace

SparseMatrix assemble_a_momentum_slot(const ScalarEvaluator& rho, const DiscreteField& u, const QuadratureSet& qs) {
  const FESpace& U = u.space();
  require_vector(U, "assemble_a_momentum_slot");
  const Mesh& mesh = U.mesh();
  const int nl = U.local_dim();
  Triplets trips;
  trips.reserve(static_cast<std::size_t>(mesh.num_elements()) * nl * nl * 2);
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector wq = volume_weights(mesh, k, qs).cwiseProduct(rho(k, QuadratureSet::kVolume));
    const PhysicalVector& p = U.mapped_vector(qs, k, QuadratureSet::kVolume);
    const Vector c = u.local_coeffs(k);
    const std::array<Vector, 2> uv{p.value[0] * c, p.value[1] * c};
    DenseMatrix W = DenseMatrix::Zero(nl, nl);
    for (int a = 0; a < 2; ++a) {
      // R(q, i) = (phi_i . grad u)_a - (u . grad phi_i)_a
      DenseMatrix R = DenseMatrix::Zero(p.value[0].rows(), nl);
      for (int b = 0; b < 2; ++b) {
        R.noalias() += (p.grad[a][b] * c).asDiagonal() * p.value[b];
        R.noalias() -= uv[b].asDiagonal() * p.grad[a][b];
      }
      W.noalias() += R.transpose() * wq.asDiagonal() * p.value[a];
    }
    scatter(trips, U.dofs(k), U.dofs(k), W);
  }
  for (int e : mesh.interior_edges()) {
    const Edge& edge = mesh.edge(e);
    const Vector we = edge_weights(edge, qs);
    const std::array<EdgeTrace, 2> t{edge_trace(mesh, e, 0), edge_trace(mesh, e, 1)};
    for (int side_i = 0; side_i < 2; ++side_i) {
      const PhysicalVector& pi = U.mapped_vector(qs, t[side_i].element, t[side_i].set);
      const DenseMatrix cu = cross_with(vector_values(u, qs, t[side_i].element, t[side_i].set), pi);
      const double sign_i = side_i == 0 ? 1.0 : -1.0;
      for (int side_j = 0; side_j < 2; ++side_j) {
        const PhysicalVector& pj = U.mapped_vector(qs, t[side_j].element, t[side_j].set);
        const Vector c = 0.5 * sign_i * we.cwiseProduct(rho(t[side_j].element, t[side_j].set));
        scatter(trips, U.dofs(t[side_i].element), U.dofs(t[side_j].element),
                cu.transpose() * c.asDiagonal() * normal_cross(edge.normal, pj));
      }
    }
  }
  return finish(U.global_dim(), U.global_dim(), trips);
}

SparseMatrix assemble_b(const VectorEvaluator& u, const FESpace& F, const FESpace& G, const QuadratureSet& qs) {
  require_scalar(F, "assemble_b");
  require_scalar(G, "assemble_b");
  const Mesh& mesh = F.mesh();
  Triplets trips;
  const DenseMatrix& gv = stab(G, qs, QuadratureSet::kVolume).value;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector wq = volume_weights(mesh, k, qs);
    const DenseMatrix uv = u(k, QuadratureSet::kVolume);
    const PhysicalScalar& pf = F.mapped_scalar(qs, k);
    const DenseMatrix adv = uv.col(0).asDiagonal() * pf.gx + uv.col(1).asDiagonal() * pf.gy;
    scatter(trips, G.dofs(k), F.dofs(k), gv.transpose() * wq.asDiagonal() * adv);
  }
  for (int e : mesh.interior_edges()) {
    const Edge& edge = mesh.edge(e);
    const EdgeTrace t1 = edge_trace(mesh, e, 0);
    const EdgeTrace t2 = edge_trace(mesh, e, 1);
    const Vector d = 0.5 * edge_weights(edge, qs).cwiseProduct(normal_component(u(t1.element, t1.set), edge.normal));
    const DenseMatrix& f1 = stab(F, qs, t1.set).value;
    const DenseMatrix& f2 = stab(F, qs, t2.set).value;
    const DenseMatrix& g1 = stab(G, qs, t1.set).value;
    const DenseMatrix& g2 = stab(G, qs, t2.set).value;
    const auto D = d.asDiagonal();
    // - (u . n)(f1 - f2)(g1 + g2)/2
    scatter(trips, G.dofs(t1.element), F.dofs(t1.element), -(g1.transpose() * D * f1));
    scatter(trips, G.dofs(t2.element), F.dofs(t1.element), -(g2.transpose() * D * f1));
    scatter(trips, G.dofs(t1.element), F.dofs(t2.element), g1.transpose() * D * f2);
    scatter(trips, G.dofs(t2.element), F.dofs(t2.element), g2.transpose() * D * f2);
  }
  return finish(G.global_dim(), F.global_dim(), trips);
}

Vector assemble_b_transpose_load(const DiscreteField& kdot, const ScalarEvaluator& rho, const FESpace& U,
                                 const QuadratureSet& qs) {
  require_vector(U, "assemble_b_transpose_load");
  const FESpace& F = kdot.space();
  require_scalar(F, "assemble_b_transpose_load");
  const Mesh& mesh = U.mesh();
  Vector out = Vector::Zero(U.global_dim());
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector wq = volume_weights(mesh, k, qs).cwiseProduct(rho(k, QuadratureSet::kVolume));
    const PhysicalVector& p = U.mapped_vector(qs, k, QuadratureSet::kVolume);
    const PhysicalScalar& pf = F.mapped_scalar(qs, k);
    const Vector c = kdot.local_coeffs(k);
    const Vector kgx = pf.gx * c, kgy = pf.gy * c;
    scatter(out, U.dofs(k),
            p.value[0].transpose() * wq.cwiseProduct(kgx) + p.value[1].transpose() * wq.cwiseProduct(kgy));
  }
  for (int e : mesh.interior_edges()) {
    const Edge& edge = mesh.edge(e);
    const EdgeTrace t1 = edge_trace(mesh, e, 0);
    const EdgeTrace t2 = edge_trace(mesh, e, 1);
    const Vector jump_k = scalar_values(kdot, qs, t1.element, t1.set) - scalar_values(kdot, qs, t2.element, t2.set);
    const Vector avg_r = 0.5 * (rho(t1.element, t1.set) + rho(t2.element, t2.set));
    const Vector c = edge_weights(edge, qs).cwiseProduct(jump_k).cwiseProduct(avg_r);
    const PhysicalVector& p_t1 = U.mapped_vector(qs, t1.element, t1.set);
    const DenseMatrix vn = p_t1.value[0] * edge.normal.x() + p_t1.value[1] * edge.normal.y();
    scatter(out, U.dofs(t1.element), -(vn.transpose() * c));
  }
  return out;
}

SparseMatrix assemble_b_transpose(const ScalarEvaluator& rho, const FESpace& F, const FESpace& U,
                                  const QuadratureSet& qs) {
  require_vector(U, "assemble_b_transpose");
  require_scalar(F, "assemble_b_transpose");
  const Mesh& mesh = U.mesh();
  Triplets trips;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const Vector wq = volume_weights(mesh, k, qs).cwiseProduct(rho(k, QuadratureSet::kVolume));
    const auto D = wq.asDiagonal();
    const PhysicalVector& p = U.mapped_vector(qs, k, QuadratureSet::kVolume);
    const PhysicalScalar& pf = F.mapped_scalar(qs, k);
    scatter(trips, U.dofs(k), F.dofs(k), p.value[0].transpose() * D * pf.gx + p.value[1].transpose() * D * pf.gy);
  }
  for (int e : mesh.interior_edges()) {
    const Edge& edge = mesh.edge(e);
    const EdgeTrace t1 = edge_trace(mesh, e, 0);
    const EdgeTrace t2 = edge_trace(mesh, e, 1);
    const Vector avg_r = 0.5 * (rho(t1.element, t1.set) + rho(t2.element, t2.set));
    const Vector c = edge_weights(edge, qs).cwiseProduct(avg_r);
    const auto D = c.asDiagonal();
    const PhysicalVector& p_t1 = U.mapped_vector(qs, t1.element, t1.set);
    const DenseMatrix vn = normal_component(p_t1.value[0], p_t1.value[1], edge.normal);
    scatter(trips, U.dofs(t1.element), F.dofs(t1.element), -(vn.transpose() * D * stab(F, qs, t1.set).value));
    scatter(trips, U.dofs(t1.element), F.dofs(t2.element), vn.transpose() * D * stab(F, qs, t2.set).value);
  }
  return finish(U.global_dim(), F.global_dim(), trips);
}

SparseMatrix assemble_product_projection(const VectorEvaluator& w, const FESpace& U, const FESpace& F,
                                         const QuadratureSet& qs) {
  require_vector(U, "assemble_product_projection");
  require_scalar(F, "assemble_product_projection");
  const ScalarTable& t = stab(F, qs, QuadratureSet::kVolume);
  const auto& w_ref = qs.volume().weights;
  const Eigen::Map<const Vector> wq(w_ref.data(), static_cast<Eigen::Index>(w_ref.size()));
  // Same reference mass solve as l2_project_scalar.
  const Eigen::LLT<DenseMatrix> llt(t.value.transpose() * wq.asDiagonal() * t.value);
  const DenseMatrix tw = t.value.transpose() * wq.asDiagonal();
  const Mesh& mesh = U.mesh();
  Triplets trips;
  for (int k = 0; k < mesh.num_elements(); ++k) {
    const DenseMatrix wv = w(k, QuadratureSet::kVolume);
    const PhysicalVector& p = U.mapped_vector(qs, k, QuadratureSet::kVolume);
    const DenseMatrix prod = wv.col(0).asDiagonal() * p.value[0] + wv.col(1).asDiagonal() * p.value[1];
    scatter(trips, F.dofs(k), U.dofs(k), llt.solve(tw * prod));
  }
  return finish(F.global_dim(), U.global_dim(), trips);
}

UpwindMomentum assemble_upwind_momentum(const VectorEvaluator& u_mid, const ScalarEvaluator& rho_mid,
                                        const VectorEvaluator& rhou_mid, const ScalarEvaluator& kdot,
                                        const UpwindConfig& cfg, const FESpace& U, const QuadratureSet& qs) {
  require_vector(U, "assemble_upwind_momentum");
  cfg.validate();
  const Mesh& mesh = U.mesh();
  UpwindMomentum out;
  out.beta = Vector::Zero(U.global_dim());
  Triplets trips;
  if (!cfg.enabled()) {
    out.alpha = SparseMatrix(U.global_dim(), U.global_dim());
    return out;
  }
  for (int e : mesh.interior_edges()) {
    const Edge& edge = mesh.edge(e);
    const Vec2& n = edge.normal;
    const Vector we = edge_weights(edge, qs);
    const EdgeTrace t1 = edge_trace(mesh, e, 0);
    const EdgeTrace t2 = edge_trace(mesh, e, 1);
    const Vector un = normal_component(u_mid(t1.element, t1.set), n);
    const Vector sgn = un.unaryExpr([](double x) { return sign(x); });

    if (cfg.c1 != 0.0) {
      const DenseMatrix jump_w = rhou_mid(t1.element, t1.set) - rhou_mid(t2.element, t2.set);
      const Vector c =
          cfg.c1 * we.cwiseProduct(sgn).cwiseProduct(jump_w.col(1) * n.x() - jump_w.col(0) * n.y());
      const PhysicalVector& p_t1 = U.mapped_vector(qs, t1.element, t1.set);
      scatter(trips, U.dofs(t1.element), U.dofs(t1.element), cross_matrix(p_t1, c));
      const PhysicalVector& p_t2 = U.mapped_vector(qs, t2.element, t2.set);
      scatter(trips, U.dofs(t2.element), U.dofs(t2.element), -cross_matrix(p_t2, c));
    }
    if (cfg.c2 != 0.0) {
      const Vector jk = kdot(t1.element, t1.set) - kdot(t2.element, t2.set);
      const Vector jr = rho_mid(t1.element, t1.set) - rho_mid(t2.element, t2.set);
      const Vector c = 0.5 * cfg.c2 * we.cwiseProduct(sgn).cwiseProduct(jk).cwiseProduct(jr);
      const PhysicalVector& p_t1 = U.mapped_vector(qs, t1.element, t1.set);
      const DenseMatrix vn = p_t1.value[0] * n.x() + p_t1.value[1] * n.y();
      scatter(out.beta, U.dofs(t1.element), vn.transpose() * c);
    }
  }
  out.alpha = finish(U.global_dim(), U.global_dim(), trips);
  return out;
}

SparseMatrix assemble_upwind_momentum_slot(const VectorEvaluator& u_mid, const ScalarEvaluator& rho,
                                           const DiscreteField& u, const UpwindConfig& cfg, const QuadratureSet& qs) {
  const FESpace& U = u.space();
  require_vector(U, "assemble_upwind_momentum_slot");
  cfg.validate();
  const Mesh& mesh = U.mesh();
  Triplets trips;
  if (cfg.c1 == 0.0)
    return finish(U.global_dim(), U.global_dim(), trips);
  for (int e : mesh.interior_edges()) {
    const Edge& edge = mesh.edge(e);
    const Vec2& n = edge.normal;
    const std::array<EdgeTrace, 2> t{edge_trace(mesh, e, 0), edge_trace(mesh, e, 1)};
    const Vector sgn = normal_component(u_mid(t[0].element, t[0].set), n).unaryExpr([](double x) { return sign(x); });
    const Vector base = cfg.c1 * edge_weights(edge, qs).cwiseProduct(sgn);
    for (int side_i = 0; side_i < 2; ++side_i) {
      const PhysicalVector& pi = U.mapped_vector(qs, t[side_i].element, t[side_i].set);
      const DenseMatrix cu = cross_with(vector_values(u, qs, t[side_i].element, t[side_i].set), pi);
      for (int side_j = 0; side_j < 2; ++side_j) {
        const PhysicalVector& pj = U.mapped_vector(qs, t[side_j].element, t[side_j].set);
        const double sign = side_i == side_j ? 1.0 : -1.0;
        const Vector c = sign * base.cwiseProduct(rho(t[side_j].element, t[side_j].set));
        scatter(trips, U.dofs(t[side_i].element), U.dofs(t[side_j].element),
                cu.transpose() * c.asDiagonal() * normal_cross(n, pj));
      }
    }
  }
  return finish(U.global_dim(), U.global_dim(), trips);
}

SparseMatrix assemble_upwind_kdot(const VectorEvaluator& u_mid, const ScalarEvaluator& rho_mid,
                                  const UpwindConfig& cfg, const FESpace& F, const FESpace& U,
                                  const QuadratureSet& qs) {
  require_vector(U, "assemble_upwind_kdot");
  require_scalar(F, "assemble_upwind_kdot");
  cfg.validate();
  const Mesh& mesh = U.mesh();
  Triplets trips;
  if (cfg.c2 == 0.0)
    return finish(U.global_dim(), F.global_dim(), trips);
  for (int e : mesh.interior_edges()) {
    const Edge& edge = mesh.edge(e);
    const Vec2& n = edge.normal;
    const EdgeTrace t1 = edge_trace(mesh, e, 0);
    const EdgeTrace t2 = edge_trace(mesh, e, 1);
    const Vector sgn = normal_component(u_mid(t1.element, t1.set), n).unaryExpr([](double x) { return sign(x); });
    const Vector jr = rho_mid(t1.element, t1.set) - rho_mid(t2.element, t2.set);
    const Vector c = 0.5 * cfg.c2 * edge_weights(edge, qs).cwiseProduct(sgn).cwiseProduct(jr);
    const auto D = c.asDiagonal();
    const PhysicalVector& p_t1 = U.mapped_vector(qs, t1.element, t1.set);
    const DenseMatrix vn = normal_component(p_t1.value[0], p_t1.value[1], n);
    scatter(trips, U.dofs(t1.element), F.dofs(t1.element), vn.transpose() * D * stab(F, qs, t1.set).value);
    scatter(trips, U.dofs(t1.element), F.dofs(t2.element), -(vn.transpose() * D * stab(F, qs, t2.set).value));
  }
  return finish(U.global_dim(), F.global_dim(), trips);
}

SparseMatrix assemble_upwind_density(const VectorEvaluator& u_mid, const UpwindConfig& cfg, const FESpace& F,
                                     const QuadratureSet& qs) {
  require_scalar(F, "assemble_upwind_density");
  cfg.validate();
  const Mesh& mesh = F.mesh();
  Triplets trips;
  if (cfg.c2 != 0.0) {
    for (int e : mesh.interior_edges()) {
      const Edge& edge = mesh.edge(e);
      const EdgeTrace t1 = edge_trace(mesh, e, 0);
      const EdgeTrace t2 = edge_trace(mesh, e, 1);
      const Vector c =
          cfg.c2 * edge_weights(edge, qs).cwiseProduct(normal_component(u_mid(t1.element, t1.set), edge.normal).cwiseAbs());
      const DenseMatrix& f1 = stab(F, qs, t1.set).value;
      const DenseMatrix& f2 = stab(F, qs, t2.set).value;
      const auto D = c.asDiagonal();
      const DenseMatrix s12 = f1.transpose() * D * f2;
      scatter(trips, F.dofs(t1.element), F.dofs(t1.element), f1.transpose() * D * f1);
      scatter(trips, F.dofs(t1.element), F.dofs(t2.element), -s12);
      scatter(trips, F.dofs(t2.element), F.dofs(t1.element), -s12.transpose());
      scatter(trips, F.dofs(t2.element), F.dofs(t2.element), f2.transpose() * D * f2);
    }
  }
  return finish(F.global_dim(), F.global_dim(), trips);
}

Vector assemble_body_force(const Vec2& g, const ScalarEvaluator& rho, const FESpace& U, const QuadratureSet& qs) {
  require_vector(U, "assemble_body_force");
  Vector out = Vector::Zero(U.global_dim());
  for (int k = 0; k < U.mesh().num_elements(); ++k) {
    const Vector wq = volume_weights(U.mesh(), k, qs).cwiseProduct(rho(k, QuadratureSet::kVolume));
    const PhysicalVector& p = U.mapped_vector(qs, k, QuadratureSet::kVolume);
    scatter(out, U.dofs(k), (g.x() * p.value[0] + g.y() * p.value[1]).transpose() * wq);
  }
  return out;
}

} // namespace vdfem
