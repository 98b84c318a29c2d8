#include "qmod/toruscomplex.hpp"

#include <Eigen/Eigenvalues>

namespace qmod {

namespace {

SpectralField gmul(const SpectralField& a, const GridField& b) {
  return SpectralField::from_grid(a.geom(), a.to_grid().matmul(b));
}

SpectralField gmul(const GridField& a, const SpectralField& b) {
  return SpectralField::from_grid(b.geom(), a.matmul(b.to_grid()));
}

}  // namespace

TorusComplex::TorusComplex(const TorusGeometry& geom, const Quiver& q,
                           TorusBundle bundle, TorusMetrics metrics,
                           double kernel_tol)
    : geom_(&geom),
      q_(&q),
      bundle_(std::move(bundle)),
      metrics_(std::move(metrics)),
      kernel_tol_(kernel_tol) {
  int nv = q.num_vertices(), na = q.num_arrows();
  h_grid_.resize(nv);
  hinv_grid_.resize(nv);
  alpha_grid_.resize(nv);
  a_z_.resize(nv);
  a_z_grid_.resize(nv);
  for (int v = 0; v < nv; ++v) {
    h_grid_[v] = metrics_.h[v].to_grid();
    hinv_grid_[v] = h_grid_[v].inverse();
    alpha_grid_[v] = bundle_.alpha[v].to_grid();
    a_z_[v] = chern_connection_z(metrics_.h[v], bundle_.alpha[v]);
    a_z_grid_[v] = a_z_[v].to_grid();
    dim0_ += bundle_.ranks[v] * bundle_.ranks[v] * geom.modes() * geom.modes();
  }
  phi_grid_.resize(na);
  phi_star_.resize(na);
  for (int a = 0; a < na; ++a) {
    phi_grid_[a] = bundle_.phi[a].to_grid();
    phi_star_[a] = grid_metric_adjoint(phi_grid_[a], hinv_grid_[q.tail(a)],
                                       h_grid_[q.head(a)]);
    dim2_ += bundle_.ranks[q.head(a)] * bundle_.ranks[q.tail(a)] *
             geom.modes() * geom.modes();
  }
  dim1_ = dim2_ + dim0_;
}

TCochain0 TorusComplex::zero0() const {
  TCochain0 c;
  for (int v = 0; v < q_->num_vertices(); ++v)
    c.xi.emplace_back(*geom_, bundle_.ranks[v], bundle_.ranks[v]);
  return c;
}

TCochain1 TorusComplex::zero1() const {
  TCochain1 c;
  for (int a = 0; a < q_->num_arrows(); ++a)
    c.chi.emplace_back(*geom_, bundle_.ranks[q_->head(a)],
                       bundle_.ranks[q_->tail(a)]);
  for (int v = 0; v < q_->num_vertices(); ++v)
    c.zeta.emplace_back(*geom_, bundle_.ranks[v], bundle_.ranks[v]);
  return c;
}

TCochain2 TorusComplex::zero2() const {
  TCochain2 c;
  for (int a = 0; a < q_->num_arrows(); ++a)
    c.chi2.emplace_back(*geom_, bundle_.ranks[q_->head(a)],
                        bundle_.ranks[q_->tail(a)]);
  return c;
}

SpectralField TorusComplex::dbar_end(int v, const SpectralField& x) const {
  GridField g = x.to_grid();
  GridField out = x.dzbar().to_grid();
  out += alpha_grid_[v].matmul(g);
  out -= g.matmul(alpha_grid_[v]);
  return SpectralField::from_grid(*geom_, out);
}

SpectralField TorusComplex::dbar_hom(int a, const SpectralField& x) const {
  GridField g = x.to_grid();
  GridField out = x.dzbar().to_grid();
  out += alpha_grid_[q_->head(a)].matmul(g);
  out -= g.matmul(alpha_grid_[q_->tail(a)]);
  return SpectralField::from_grid(*geom_, out);
}

SpectralField TorusComplex::dbar_star_end(int v, const SpectralField& z) const {
  GridField g = z.to_grid();
  GridField out = z.dz().to_grid();
  out += a_z_grid_[v].matmul(g);
  out -= g.matmul(a_z_grid_[v]);
  out *= cx(-geom_->g_inverse());
  return SpectralField::from_grid(*geom_, out);
}

SpectralField TorusComplex::dbar_star_hom(int a, const SpectralField& x) const {
  GridField g = x.to_grid();
  GridField out = x.dz().to_grid();
  out += a_z_grid_[q_->head(a)].matmul(g);
  out -= g.matmul(a_z_grid_[q_->tail(a)]);
  out *= cx(-geom_->g_inverse());
  return SpectralField::from_grid(*geom_, out);
}

TCochain1 TorusComplex::delta(const TCochain0& xi) const {
  TCochain1 out = zero1();
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int hd = q_->head(a), tl = q_->tail(a);
    SpectralField term = gmul(xi.xi[hd].to_grid(), bundle_.phi[a]);
    term *= cx(1.0 / std::sqrt(q_->weight(hd)));
    SpectralField term2 = gmul(bundle_.phi[a], xi.xi[tl].to_grid());
    term2 *= cx(1.0 / std::sqrt(q_->weight(tl)));
    out.chi[a] = term - term2;
  }
  return out;
}

TCochain0 TorusComplex::delta_adjoint(const TCochain1& c) const {
  TCochain0 out = zero0();
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int hd = q_->head(a), tl = q_->tail(a);
    GridField cg = c.chi[a].to_grid();
    SpectralField head_term =
        SpectralField::from_grid(*geom_, cg.matmul(phi_star_[a]));
    head_term *= cx(1.0 / std::sqrt(q_->weight(hd)));
    out.xi[hd] += head_term;
    SpectralField tail_term =
        SpectralField::from_grid(*geom_, phi_star_[a].matmul(cg));
    tail_term *= cx(1.0 / std::sqrt(q_->weight(tl)));
    out.xi[tl] -= tail_term;
  }
  return out;
}

TCochain1 TorusComplex::d0(const TCochain0& xi) const {
  TCochain1 out = delta(xi);
  for (int v = 0; v < q_->num_vertices(); ++v)
    out.zeta[v] = dbar_end(v, xi.xi[v]);
  return out;
}

TCochain2 TorusComplex::d1(const TCochain1& c) const {
  TCochain2 out = zero2();
  TCochain0 zeta_c{c.zeta};
  TCochain1 dz = delta(zeta_c);
  for (int a = 0; a < q_->num_arrows(); ++a)
    out.chi2[a] = dbar_hom(a, c.chi[a]) - dz.chi[a];
  return out;
}

TCochain0 TorusComplex::d0_adjoint(const TCochain1& c) const {
  TCochain0 out = delta_adjoint(c);
  for (int v = 0; v < q_->num_vertices(); ++v)
    out.xi[v] += dbar_star_end(v, c.zeta[v]);
  return out;
}

TCochain1 TorusComplex::d1_adjoint(const TCochain2& c) const {
  TCochain1 out = zero1();
  for (int a = 0; a < q_->num_arrows(); ++a)
    out.chi[a] = dbar_star_hom(a, c.chi2[a]);
  // Vertex component: (1/sqrt n)(sum_{t(a)=v} phi* chi2 - sum_{h(a)=v} chi2 phi*).
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int hd = q_->head(a), tl = q_->tail(a);
    GridField cg = c.chi2[a].to_grid();
    SpectralField tail_term =
        SpectralField::from_grid(*geom_, phi_star_[a].matmul(cg));
    tail_term *= cx(1.0 / std::sqrt(q_->weight(tl)));
    out.zeta[tl] += tail_term;
    SpectralField head_term =
        SpectralField::from_grid(*geom_, cg.matmul(phi_star_[a]));
    head_term *= cx(1.0 / std::sqrt(q_->weight(hd)));
    out.zeta[hd] -= head_term;
  }
  return out;
}

TCochain0 TorusComplex::laplacian0(const TCochain0& xi) const {
  return d0_adjoint(d0(xi));
}

TCochain0 TorusComplex::laplacian0_closed_form(const TCochain0& xi) const {
  TCochain0 out = zero0();
  for (int v = 0; v < q_->num_vertices(); ++v) {
    double nv = q_->weight(v);
    GridField acc(*geom_, bundle_.ranks[v], bundle_.ranks[v]);
    for (int a : q_->arrows_out_of(v)) {
      int hd = q_->head(a);
      acc += cx(1.0 / nv) *
             phi_star_[a].matmul(phi_grid_[a]).matmul(xi.xi[v].to_grid());
      acc -= cx(1.0 / std::sqrt(nv * q_->weight(hd))) *
             phi_star_[a].matmul(xi.xi[hd].to_grid()).matmul(phi_grid_[a]);
    }
    for (int a : q_->arrows_into(v)) {
      int tl = q_->tail(a);
      acc += cx(1.0 / nv) *
             xi.xi[v].to_grid().matmul(phi_grid_[a]).matmul(phi_star_[a]);
      acc -= cx(1.0 / std::sqrt(nv * q_->weight(tl))) *
             phi_grid_[a].matmul(xi.xi[tl].to_grid()).matmul(phi_star_[a]);
    }
    out.xi[v] = SpectralField::from_grid(*geom_, acc);
    out.xi[v] += dbar_star_end(v, dbar_end(v, xi.xi[v]));
  }
  return out;
}

TCochain1 TorusComplex::hodge1(const TCochain1& c) const {
  TCochain1 out = d0(d0_adjoint(c));
  TCochain1 second = d1_adjoint(d1(c));
  for (size_t i = 0; i < out.chi.size(); ++i) out.chi[i] += second.chi[i];
  for (size_t i = 0; i < out.zeta.size(); ++i) out.zeta[i] += second.zeta[i];
  return out;
}

TCochain2 TorusComplex::hodge2(const TCochain2& c) const {
  return d1(d1_adjoint(c));
}

namespace {

cx field_inner(const GridField& x, const GridField& y, const GridField& hti,
               const GridField& hh, double weight, double area) {
  GridField ystar = grid_metric_adjoint(y, hti, hh);
  Matrix tr = x.matmul(ystar).trace();
  return weight * area * tr.mean();
}

}  // namespace

cx TorusComplex::inner0(const TCochain0& x, const TCochain0& y) const {
  cx acc = 0.0;
  for (int v = 0; v < q_->num_vertices(); ++v)
    acc += field_inner(x.xi[v].to_grid(), y.xi[v].to_grid(), hinv_grid_[v],
                       h_grid_[v], 1.0, geom_->area());
  return acc;
}

cx TorusComplex::inner1(const TCochain1& x, const TCochain1& y) const {
  cx acc = 0.0;
  for (int a = 0; a < q_->num_arrows(); ++a)
    acc += field_inner(x.chi[a].to_grid(), y.chi[a].to_grid(),
                       hinv_grid_[q_->tail(a)], h_grid_[q_->head(a)], 1.0,
                       geom_->area());
  for (int v = 0; v < q_->num_vertices(); ++v)
    acc += field_inner(x.zeta[v].to_grid(), y.zeta[v].to_grid(), hinv_grid_[v],
                       h_grid_[v], geom_->g_inverse(), geom_->area());
  return acc;
}

cx TorusComplex::inner2(const TCochain2& x, const TCochain2& y) const {
  cx acc = 0.0;
  for (int a = 0; a < q_->num_arrows(); ++a)
    acc += field_inner(x.chi2[a].to_grid(), y.chi2[a].to_grid(),
                       hinv_grid_[q_->tail(a)], h_grid_[q_->head(a)],
                       geom_->g_inverse(), geom_->area());
  return acc;
}

double TorusComplex::norm0(const TCochain0& x) const {
  return std::sqrt(std::max(0.0, inner0(x, x).real()));
}
double TorusComplex::norm1(const TCochain1& x) const {
  return std::sqrt(std::max(0.0, inner1(x, x).real()));
}
double TorusComplex::norm2(const TCochain2& x) const {
  return std::sqrt(std::max(0.0, inner2(x, x).real()));
}

TCochain0 TorusComplex::vee(const TCochain1& u, const TCochain1& v) const {
  TCochain0 out = zero0();
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int hd = q_->head(a), tl = q_->tail(a);
    GridField vstar = grid_metric_adjoint(v.chi[a].to_grid(),
                                          hinv_grid_[tl], h_grid_[hd]);
    GridField ug = u.chi[a].to_grid();
    out.xi[hd] += cx(1.0 / std::sqrt(q_->weight(hd))) *
                  SpectralField::from_grid(*geom_, ug.matmul(vstar));
    out.xi[tl] -= cx(1.0 / std::sqrt(q_->weight(tl))) *
                  SpectralField::from_grid(*geom_, vstar.matmul(ug));
  }
  for (int w = 0; w < q_->num_vertices(); ++w) {
    GridField vstar = grid_metric_adjoint(v.zeta[w].to_grid(), hinv_grid_[w],
                                          h_grid_[w]);
    GridField ug = u.zeta[w].to_grid();
    GridField bracket = ug.matmul(vstar);
    bracket -= vstar.matmul(ug);
    bracket *= cx(geom_->g_inverse() / std::sqrt(q_->weight(w)));
    out.xi[w] += SpectralField::from_grid(*geom_, bracket);
  }
  return out;
}

TCochain2 TorusComplex::sym_wedge(const TCochain1& u, const TCochain1& v) const {
  TCochain2 out = zero2();
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int hd = q_->head(a), tl = q_->tail(a);
    GridField term(*geom_, bundle_.ranks[hd], bundle_.ranks[tl]);
    term += u.zeta[hd].to_grid().matmul(v.chi[a].to_grid());
    term += v.zeta[hd].to_grid().matmul(u.chi[a].to_grid());
    term *= cx(1.0 / std::sqrt(q_->weight(hd)));
    GridField term2(*geom_, bundle_.ranks[hd], bundle_.ranks[tl]);
    term2 += v.chi[a].to_grid().matmul(u.zeta[tl].to_grid());
    term2 += u.chi[a].to_grid().matmul(v.zeta[tl].to_grid());
    term2 *= cx(1.0 / std::sqrt(q_->weight(tl)));
    term -= term2;
    out.chi2[a] = SpectralField::from_grid(*geom_, term);
  }
  return out;
}

Vector TorusComplex::flatten0(const TCochain0& x) const {
  Vector v(dim0_);
  long at = 0;
  for (const auto& f : x.xi) {
    Vector part = f.flatten();
    v.segment(at, part.size()) = part;
    at += part.size();
  }
  return v;
}

TCochain0 TorusComplex::unflatten0(const Vector& v) const {
  TCochain0 out;
  long at = 0;
  int K = geom_->modes();
  for (int w = 0; w < q_->num_vertices(); ++w) {
    int d = bundle_.ranks[w];
    long len = static_cast<long>(d) * d * K * K;
    out.xi.push_back(
        SpectralField::unflatten(*geom_, d, d, v.segment(at, len)));
    at += len;
  }
  return out;
}

Vector TorusComplex::flatten1(const TCochain1& x) const {
  Vector v(dim1_);
  long at = 0;
  for (const auto& f : x.chi) {
    Vector part = f.flatten();
    v.segment(at, part.size()) = part;
    at += part.size();
  }
  for (const auto& f : x.zeta) {
    Vector part = f.flatten();
    v.segment(at, part.size()) = part;
    at += part.size();
  }
  return v;
}

TCochain1 TorusComplex::unflatten1(const Vector& v) const {
  TCochain1 out;
  long at = 0;
  int K = geom_->modes();
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int r = bundle_.ranks[q_->head(a)], c = bundle_.ranks[q_->tail(a)];
    long len = static_cast<long>(r) * c * K * K;
    out.chi.push_back(
        SpectralField::unflatten(*geom_, r, c, v.segment(at, len)));
    at += len;
  }
  for (int w = 0; w < q_->num_vertices(); ++w) {
    int d = bundle_.ranks[w];
    long len = static_cast<long>(d) * d * K * K;
    out.zeta.push_back(
        SpectralField::unflatten(*geom_, d, d, v.segment(at, len)));
    at += len;
  }
  return out;
}

Vector TorusComplex::flatten2(const TCochain2& x) const {
  Vector v(dim2_);
  long at = 0;
  for (const auto& f : x.chi2) {
    Vector part = f.flatten();
    v.segment(at, part.size()) = part;
    at += part.size();
  }
  return v;
}

TCochain2 TorusComplex::unflatten2(const Vector& v) const {
  TCochain2 out;
  long at = 0;
  int K = geom_->modes();
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int r = bundle_.ranks[q_->head(a)], c = bundle_.ranks[q_->tail(a)];
    long len = static_cast<long>(r) * c * K * K;
    out.chi2.push_back(
        SpectralField::unflatten(*geom_, r, c, v.segment(at, len)));
    at += len;
  }
  return out;
}

TorusComplex::LevelSpectrum& TorusComplex::level(int lvl) {
  if (spectra_[lvl]) return *spectra_[lvl];
  int dim = lvl == 0 ? dim0_ : (lvl == 1 ? dim1_ : dim2_);
  if (dim == 0) {
    LevelSpectrum empty;
    empty.evals = Eigen::VectorXd(0);
    empty.vecs = Matrix(0, 0);
    empty.gram = Matrix(0, 0);
    spectra_[lvl] = std::move(empty);
    return *spectra_[lvl];
  }

  Matrix box(dim, dim);
  Matrix gram(dim, dim);
  for (int j = 0; j < dim; ++j) {
    Vector e = Vector::Zero(dim);
    e[j] = 1.0;
    if (lvl == 0) {
      TCochain0 c = unflatten0(e);
      box.col(j) = flatten0(laplacian0(c));
    } else if (lvl == 1) {
      TCochain1 c = unflatten1(e);
      box.col(j) = flatten1(hodge1(c));
    } else {
      TCochain2 c = unflatten2(e);
      box.col(j) = flatten2(hodge2(c));
    }
  }
  // Gram matrix of the metric inner product: block-diagonal over vertices and
  // arrows. Per block, the map X -> h_head^{1/2} X h_tail^{-1/2} evaluated on
  // the grid is an isometry onto plain L^2 values, so W_block = J^dag J.
  gram.setZero();
  int K = geom_->modes();
  auto block_gram = [&](int rows, int cols, const GridField& hh_sqrt,
                        const GridField& ht_invsqrt, double weight) -> Matrix {
    int bdim = rows * cols * K * K;
    long grows = static_cast<long>(geom_->grid()) * geom_->grid() * rows * cols;
    Matrix J(grows, bdim);
    double scale = std::sqrt(weight * geom_->area()) / geom_->grid();
    int col = 0;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        for (int m2 = -geom_->band(); m2 <= geom_->band(); ++m2)
          for (int m1 = -geom_->band(); m1 <= geom_->band(); ++m1) {
            SpectralField basis =
                SpectralField::mode(*geom_, rows, cols, r, c, m1, m2, cx(1.0));
            GridField iso = hh_sqrt.matmul(basis.to_grid()).matmul(ht_invsqrt);
            long at = 0;
            for (int rr = 0; rr < rows; ++rr)
              for (int cc = 0; cc < cols; ++cc) {
                J.col(col).segment(at, geom_->grid() * geom_->grid()) =
                    scale * Eigen::Map<const Vector>(iso.entry(rr, cc).data(),
                                                     iso.entry(rr, cc).size());
                at += static_cast<long>(geom_->grid()) * geom_->grid();
              }
            ++col;
          }
    return J.adjoint() * J;
  };

  std::vector<GridField> h_sqrt(q_->num_vertices()), h_invsqrt(q_->num_vertices());
  for (int v = 0; v < q_->num_vertices(); ++v) {
    h_sqrt[v] = h_grid_[v].herm_sqrt();
    h_invsqrt[v] = h_grid_[v].herm_inv_sqrt();
  }
  long at = 0;
  auto place = [&](const Matrix& wb) {
    gram.block(at, at, wb.rows(), wb.cols()) = wb;
    at += wb.rows();
  };
  if (lvl == 0) {
    for (int v = 0; v < q_->num_vertices(); ++v)
      place(block_gram(bundle_.ranks[v], bundle_.ranks[v], h_sqrt[v],
                       h_invsqrt[v], 1.0));
  } else if (lvl == 1) {
    for (int a = 0; a < q_->num_arrows(); ++a)
      place(block_gram(bundle_.ranks[q_->head(a)], bundle_.ranks[q_->tail(a)],
                       h_sqrt[q_->head(a)], h_invsqrt[q_->tail(a)], 1.0));
    for (int v = 0; v < q_->num_vertices(); ++v)
      place(block_gram(bundle_.ranks[v], bundle_.ranks[v], h_sqrt[v],
                       h_invsqrt[v], geom_->g_inverse()));
  } else {
    for (int a = 0; a < q_->num_arrows(); ++a)
      place(block_gram(bundle_.ranks[q_->head(a)], bundle_.ranks[q_->tail(a)],
                       h_sqrt[q_->head(a)], h_invsqrt[q_->tail(a)],
                       geom_->g_inverse()));
  }
  gram = 0.5 * (gram + Matrix(gram.adjoint()));

  LevelSpectrum spec;
  spec.gram = gram;
  Matrix A = gram * box;
  A = 0.5 * (A + Matrix(A.adjoint()));
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(A, gram);
  spec.evals = es.eigenvalues();
  spec.vecs = es.eigenvectors();
  double emax = spec.evals.size() ? std::max(spec.evals.maxCoeff(), 0.0) : 0.0;
  spec.cut = kernel_tol_ * std::max(emax, 1e-300);
  for (int i = 0; i < spec.evals.size(); ++i)
    if (spec.evals[i] > spec.cut && spec.evals[i] < 10.0 * spec.cut)
      spec.gap_warning = true;
  spectra_[lvl] = std::move(spec);
  return *spectra_[lvl];
}

Vector TorusComplex::spectral_apply(int lvl, const Vector& x, bool greens) {
  LevelSpectrum& spec = level(lvl);
  Vector c = spec.vecs.adjoint() * (spec.gram * x);
  for (int i = 0; i < c.size(); ++i) {
    if (greens)
      c[i] = (spec.evals[i] > spec.cut) ? c[i] / spec.evals[i] : cx(0.0);
    else
      c[i] = (spec.evals[i] > spec.cut) ? cx(0.0) : c[i];
  }
  return spec.vecs * c;
}

TCochain0 TorusComplex::harmonic_projection0(const TCochain0& x) {
  return unflatten0(spectral_apply(0, flatten0(x), false));
}
TCochain0 TorusComplex::greens0(const TCochain0& x) {
  return unflatten0(spectral_apply(0, flatten0(x), true));
}
TCochain1 TorusComplex::harmonic_projection1(const TCochain1& x) {
  return unflatten1(spectral_apply(1, flatten1(x), false));
}
TCochain1 TorusComplex::greens1(const TCochain1& x) {
  return unflatten1(spectral_apply(1, flatten1(x), true));
}
TCochain2 TorusComplex::greens2(const TCochain2& x) {
  return unflatten2(spectral_apply(2, flatten2(x), true));
}

bool TorusComplex::greens_gap_warning(int lvl) { return level(lvl).gap_warning; }

TorusComplex::HyperDims TorusComplex::hyperdims() {
  HyperDims hd;
  for (int lvl = 0; lvl < 3; ++lvl) {
    LevelSpectrum& spec = level(lvl);
    int k = 0;
    for (int i = 0; i < spec.evals.size(); ++i)
      if (spec.evals[i] <= spec.cut) ++k;
    if (lvl == 0) hd.h0 = k;
    if (lvl == 1) hd.h1 = k;
    if (lvl == 2) hd.h2 = k;
  }
  return hd;
}

}  // namespace qmod
