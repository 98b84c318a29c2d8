#include "qmod/pointcomplex.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qmod {

namespace {

Vector vec(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

Matrix unvec(const Vector& v, long rows, long cols) {
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

}  // namespace

PointComplex::PointComplex(const Quiver& q, Representation rep,
                           MetricAssignment metrics, RelationSet relations,
                           double kernel_tol)
    : q_(&q),
      rep_(std::move(rep)),
      metrics_(std::move(metrics)),
      relations_(std::move(relations)),
      kernel_tol_(kernel_tol) {
  rep_.validate(q);
  metrics_.validate(rep_);

  sqrt_h_.resize(q.num_vertices());
  inv_sqrt_h_.resize(q.num_vertices());
  off_c0_.resize(q.num_vertices());
  for (int v = 0; v < q.num_vertices(); ++v) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(metrics_.h[v]);
    sqrt_h_[v] = es.operatorSqrt();
    inv_sqrt_h_[v] = es.operatorInverseSqrt();
    off_c0_[v] = dim_c0_;
    dim_c0_ += rep_.dims[v] * rep_.dims[v];
  }
  adj_.resize(q.num_arrows());
  off_c1_.resize(q.num_arrows());
  for (int a = 0; a < q.num_arrows(); ++a) {
    adj_[a] = metric_adjoint(rep_.maps[a], metrics_.h[q.tail(a)],
                             metrics_.h[q.head(a)]);
    off_c1_[a] = dim_c1_full_;
    dim_c1_full_ += rep_.dims[q.head(a)] * rep_.dims[q.tail(a)];
  }

  build_bases(kernel_tol);
  build_spectra();
}

// Orthonormal coordinates: xi_v -> h_v^{1/2} xi_v h_v^{-1/2} maps the metric
// inner product tr(x h^{-1} y^dag h) to the Frobenius one; similarly for
// arrows with h_head^{1/2} psi h_tail^{-1/2}.
Vector PointComplex::to_coords0(const VertexBlocks& x) const {
  Vector out(dim_c0_);
  for (int v = 0; v < q_->num_vertices(); ++v) {
    Matrix iso = sqrt_h_[v] * x[v] * inv_sqrt_h_[v];
    out.segment(off_c0_[v], iso.size()) = vec(iso);
  }
  return out;
}

VertexBlocks PointComplex::from_coords0(const Vector& v) const {
  VertexBlocks out(q_->num_vertices());
  for (int w = 0; w < q_->num_vertices(); ++w) {
    int d = rep_.dims[w];
    Matrix iso = unvec(v.segment(off_c0_[w], d * d), d, d);
    out[w] = inv_sqrt_h_[w] * iso * sqrt_h_[w];
  }
  return out;
}

Vector PointComplex::to_coords1(const ArrowBlocks& x) const {
  Vector out(dim_c1_full_);
  for (int a = 0; a < q_->num_arrows(); ++a) {
    Matrix iso = sqrt_h_[q_->head(a)] * x[a] * inv_sqrt_h_[q_->tail(a)];
    out.segment(off_c1_[a], iso.size()) = vec(iso);
  }
  return out;
}

ArrowBlocks PointComplex::from_coords1(const Vector& v) const {
  ArrowBlocks out(q_->num_arrows());
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int dh = rep_.dims[q_->head(a)], dt = rep_.dims[q_->tail(a)];
    Matrix iso = unvec(v.segment(off_c1_[a], dh * dt), dh, dt);
    out[a] = inv_sqrt_h_[q_->head(a)] * iso * sqrt_h_[q_->tail(a)];
  }
  return out;
}

Vector PointComplex::to_a1_coords(const ArrowBlocks& x) const {
  return a1_basis_.adjoint() * to_coords1(x);
}

ArrowBlocks PointComplex::from_a1_coords(const Vector& v) const {
  return from_coords1(a1_basis_ * v);
}

VertexBlocks PointComplex::zero0() const {
  VertexBlocks z(q_->num_vertices());
  for (int v = 0; v < q_->num_vertices(); ++v)
    z[v] = Matrix::Zero(rep_.dims[v], rep_.dims[v]);
  return z;
}

ArrowBlocks PointComplex::zero1() const {
  ArrowBlocks z(q_->num_arrows());
  for (int a = 0; a < q_->num_arrows(); ++a)
    z[a] = Matrix::Zero(rep_.dims[q_->head(a)], rep_.dims[q_->tail(a)]);
  return z;
}

ArrowBlocks PointComplex::delta(const VertexBlocks& xi) const {
  ArrowBlocks out(q_->num_arrows());
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int hd = q_->head(a), tl = q_->tail(a);
    out[a] = xi[hd] * rep_.maps[a] / std::sqrt(q_->weight(hd)) -
             rep_.maps[a] * xi[tl] / std::sqrt(q_->weight(tl));
  }
  return out;
}

VertexBlocks PointComplex::delta_adjoint(const ArrowBlocks& psi) const {
  VertexBlocks out = zero0();
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int hd = q_->head(a), tl = q_->tail(a);
    out[hd] += psi[a] * adj_[a] / std::sqrt(q_->weight(hd));
    out[tl] -= adj_[a] * psi[a] / std::sqrt(q_->weight(tl));
  }
  return out;
}

Matrix PointComplex::linearize_relation(const Relation& r,
                                        const ArrowBlocks& psi) const {
  r.validate(*q_);
  int dh = rep_.dim(r.head(*q_)), dt = rep_.dim(r.tail(*q_));
  Matrix acc = Matrix::Zero(dh, dt);
  for (const auto& term : r.terms) {
    const auto& word = term.path.arrows();
    for (size_t k = 0; k < word.size(); ++k) {
      Matrix pre = Matrix::Identity(rep_.dim(q_->head(word[k])),
                                    rep_.dim(q_->head(word[k])));
      for (size_t i = 0; i < k; ++i) {
        // product phi_{a_0} ... phi_{a_{k-1}} applied on the left
        pre = (i == 0) ? rep_.maps[word[0]] : Matrix(pre * rep_.maps[word[i]]);
      }
      Matrix suf = Matrix::Identity(rep_.dim(q_->tail(word[k])),
                                    rep_.dim(q_->tail(word[k])));
      for (size_t i = k + 1; i < word.size(); ++i) {
        suf = (i == k + 1) ? rep_.maps[word[i]] : Matrix(suf * rep_.maps[word[i]]);
      }
      acc += term.coeff * pre * psi[word[k]] * suf;
    }
  }
  return acc;
}

double PointComplex::linearized_relation_residual(const ArrowBlocks& psi) const {
  double worst = 0.0;
  for (const auto& r : relations_)
    worst = std::max(worst, sup_abs(linearize_relation(r, psi)));
  return worst;
}

ArrowBlocks PointComplex::project_to_a1(const ArrowBlocks& psi) const {
  return from_coords1(a1_basis_ * (a1_basis_.adjoint() * to_coords1(psi)));
}

VertexBlocks PointComplex::laplacian0(const VertexBlocks& xi) const {
  return delta_adjoint(delta(xi));
}

VertexBlocks PointComplex::laplacian0_closed_form(const VertexBlocks& xi) const {
  VertexBlocks out = zero0();
  for (int v = 0; v < q_->num_vertices(); ++v) {
    double nv = q_->weight(v);
    for (int a : q_->arrows_out_of(v)) {
      int hd = q_->head(a);
      out[v] += adj_[a] * rep_.maps[a] * xi[v] / nv -
                adj_[a] * xi[hd] * rep_.maps[a] / std::sqrt(nv * q_->weight(hd));
    }
    for (int a : q_->arrows_into(v)) {
      int tl = q_->tail(a);
      out[v] += xi[v] * rep_.maps[a] * adj_[a] / nv -
                rep_.maps[a] * xi[tl] * adj_[a] / std::sqrt(nv * q_->weight(tl));
    }
  }
  return out;
}

ArrowBlocks PointComplex::hodge1(const ArrowBlocks& psi) const {
  return delta(delta_adjoint(psi));
}

cx PointComplex::inner0(const VertexBlocks& x, const VertexBlocks& y) const {
  cx acc = 0.0;
  for (int v = 0; v < q_->num_vertices(); ++v) {
    Matrix ystar = inv_sqrt_h_[v] * inv_sqrt_h_[v] * y[v].adjoint() *
                   sqrt_h_[v] * sqrt_h_[v];
    acc += (x[v] * ystar).trace();
  }
  return acc;
}

cx PointComplex::inner1(const ArrowBlocks& x, const ArrowBlocks& y) const {
  cx acc = 0.0;
  for (int a = 0; a < q_->num_arrows(); ++a) {
    Matrix ystar = metric_adjoint(y[a], metrics_.h[q_->tail(a)],
                                  metrics_.h[q_->head(a)]);
    acc += (x[a] * ystar).trace();
  }
  return acc;
}

double PointComplex::norm0(const VertexBlocks& x) const {
  return std::sqrt(std::max(0.0, inner0(x, x).real()));
}

double PointComplex::norm1(const ArrowBlocks& x) const {
  return std::sqrt(std::max(0.0, inner1(x, x).real()));
}

VertexBlocks PointComplex::vee(const ArrowBlocks& u, const ArrowBlocks& v) const {
  VertexBlocks out = zero0();
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int hd = q_->head(a), tl = q_->tail(a);
    Matrix vstar = metric_adjoint(v[a], metrics_.h[tl], metrics_.h[hd]);
    out[hd] += u[a] * vstar / std::sqrt(q_->weight(hd));
    out[tl] -= vstar * u[a] / std::sqrt(q_->weight(tl));
  }
  return out;
}

void PointComplex::build_bases(double kernel_tol) {
  // Dense d0 (full C1 coordinates) by columns.
  d0_full_ = Matrix::Zero(dim_c1_full_, dim_c0_);
  for (int j = 0; j < dim_c0_; ++j) {
    Vector e = Vector::Zero(dim_c0_);
    e[j] = 1.0;
    d0_full_.col(j) = to_coords1(delta(from_coords0(e)));
  }

  // A1 = kernel of the linearized relation map, orthonormal in coordinates.
  int rel_rows = 0;
  for (const auto& r : relations_)
    rel_rows += rep_.dim(r.head(*q_)) * rep_.dim(r.tail(*q_));
  if (rel_rows == 0) {
    a1_basis_ = Matrix::Identity(dim_c1_full_, dim_c1_full_);
  } else {
    Matrix L = Matrix::Zero(rel_rows, dim_c1_full_);
    for (int j = 0; j < dim_c1_full_; ++j) {
      Vector e = Vector::Zero(dim_c1_full_);
      e[j] = 1.0;
      ArrowBlocks psi = from_coords1(e);
      int row = 0;
      for (const auto& r : relations_) {
        Matrix val = linearize_relation(r, psi);
        L.col(j).segment(row, val.size()) = vec(val);
        row += static_cast<int>(val.size());
      }
    }
    Eigen::JacobiSVD<Matrix> svd(L, Eigen::ComputeFullV);
    double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    int rank = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > kernel_tol * std::max(smax, 1e-300)) ++rank;
    a1_basis_ = svd.matrixV().rightCols(dim_c1_full_ - rank);
  }
  d0_a1_ = a1_basis_.adjoint() * d0_full_;
}

void PointComplex::build_spectra() {
  auto decompose = [](const Matrix& box, Eigen::VectorXd* evals, Matrix* evecs) {
    if (box.rows() == 0) {
      *evals = Eigen::VectorXd(0);
      *evecs = Matrix(0, 0);
      return;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(box);
    *evals = es.eigenvalues();
    *evecs = es.eigenvectors();
  };
  decompose(d0_a1_.adjoint() * d0_a1_, &evals0_, &evecs0_);
  decompose(d0_a1_ * d0_a1_.adjoint(), &evals1_, &evecs1_);

  auto cut = [&](const Eigen::VectorXd& ev, double* cut_out, bool* warn) {
    double emax = ev.size() ? std::max(ev.maxCoeff(), 0.0) : 0.0;
    *cut_out = kernel_tol_ * std::max(emax, 1e-300);
    *warn = false;
    for (int i = 0; i < ev.size(); ++i)
      if (ev[i] > *cut_out && ev[i] < 10.0 * *cut_out) *warn = true;
  };
  cut(evals0_, &kernel_cut0_, &gap_warning0_);
  cut(evals1_, &kernel_cut1_, &gap_warning1_);
}

namespace {

Vector spectral_apply(const Eigen::VectorXd& evals, const Matrix& evecs,
                      double cut, bool greens, const Vector& x) {
  Vector c = evecs.adjoint() * x;
  for (int i = 0; i < c.size(); ++i) {
    if (greens)
      c[i] = (evals[i] > cut) ? c[i] / evals[i] : cx(0.0);
    else
      c[i] = (evals[i] > cut) ? cx(0.0) : c[i];
  }
  return evecs * c;
}

}  // namespace

VertexBlocks PointComplex::harmonic_projection0(const VertexBlocks& x) const {
  return from_coords0(
      spectral_apply(evals0_, evecs0_, kernel_cut0_, false, to_coords0(x)));
}

VertexBlocks PointComplex::greens0(const VertexBlocks& x) const {
  return from_coords0(
      spectral_apply(evals0_, evecs0_, kernel_cut0_, true, to_coords0(x)));
}

ArrowBlocks PointComplex::harmonic_projection1(const ArrowBlocks& x) const {
  return from_a1_coords(
      spectral_apply(evals1_, evecs1_, kernel_cut1_, false, to_a1_coords(x)));
}

ArrowBlocks PointComplex::greens1(const ArrowBlocks& x) const {
  return from_a1_coords(
      spectral_apply(evals1_, evecs1_, kernel_cut1_, true, to_a1_coords(x)));
}

bool PointComplex::greens_gap_warning(int level) const {
  return level == 0 ? gap_warning0_ : gap_warning1_;
}

PointComplex::HyperDims PointComplex::hyperdims() const {
  HyperDims hd;
  hd.dim_b0 = dim_c0_;
  hd.dim_a1 = dim_a1();
  int rank = 0;
  if (d0_a1_.rows() > 0 && d0_a1_.cols() > 0) {
    Eigen::JacobiSVD<Matrix> svd(d0_a1_);
    double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > kernel_tol_ * std::max(smax, 1e-300)) ++rank;
  }
  hd.h0 = hd.dim_b0 - rank;
  hd.h1 = hd.dim_a1 - rank;
  hd.h2 = 0;
  return hd;
}

}  // namespace qmod
