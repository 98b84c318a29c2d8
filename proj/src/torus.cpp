#include "qmod/torus.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace qmod {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TorusGeometry::TorusGeometry(cx modulus, double area, int band)
    : tau_(modulus), area_(area), N_(band) {
  if (tau_.imag() <= 0.0)
    throw std::invalid_argument("torus modulus needs positive imaginary part");
  if (area_ <= 0.0) throw std::invalid_argument("torus area must be positive");
  if (N_ < 1) throw std::invalid_argument("band must be at least 1");
  M_ = 2 * (2 * N_ + 1);
  g11_ = area_ / (2.0 * tau_.imag());
  ginv_ = 1.0 / g11_;

  int K = modes();
  dz_mult_ = Matrix(K, K);
  dzbar_mult_ = Matrix(K, K);
  for (int m1 = -N_; m1 <= N_; ++m1)
    for (int m2 = -N_; m2 <= N_; ++m2) {
      dz_mult_(m1 + N_, m2 + N_) = lambda_z(m1, m2);
      dzbar_mult_(m1 + N_, m2 + N_) = lambda_zbar(m1, m2);
    }

  eval_ = Matrix(M_, K);
  project_ = Matrix(K, M_);
  for (int j = 0; j < M_; ++j)
    for (int m = -N_; m <= N_; ++m) {
      double arg = 2.0 * kPi * m * j / static_cast<double>(M_);
      eval_(j, m + N_) = cx(std::cos(arg), std::sin(arg));
      project_(m + N_, j) = cx(std::cos(arg), -std::sin(arg)) / double(M_);
    }
}

cx TorusGeometry::lambda_z(int m1, int m2) const {
  return kPi / tau_.imag() * (cx(m2) - std::conj(tau_) * cx(m1));
}

cx TorusGeometry::lambda_zbar(int m1, int m2) const {
  return kPi / tau_.imag() * (tau_ * cx(m1) - cx(m2));
}

SpectralField::SpectralField(const TorusGeometry& geom, int rows, int cols)
    : geom_(&geom), rows_(rows), cols_(cols) {
  entries_.assign(static_cast<size_t>(rows) * cols,
                  Matrix::Zero(geom.modes(), geom.modes()));
}

SpectralField SpectralField::constant(const TorusGeometry& geom,
                                      const Matrix& value) {
  SpectralField f(geom, static_cast<int>(value.rows()),
                  static_cast<int>(value.cols()));
  for (int r = 0; r < f.rows_; ++r)
    for (int c = 0; c < f.cols_; ++c)
      f.entries_[r * f.cols_ + c](geom.band(), geom.band()) = value(r, c);
  return f;
}

SpectralField SpectralField::mode(const TorusGeometry& geom, int rows, int cols,
                                  int r, int c, int m1, int m2, cx amplitude) {
  SpectralField f(geom, rows, cols);
  f.coef(r, c, m1, m2) = amplitude;
  return f;
}

cx& SpectralField::coef(int r, int c, int m1, int m2) {
  return entries_[r * cols_ + c](m1 + geom_->band(), m2 + geom_->band());
}

cx SpectralField::coef(int r, int c, int m1, int m2) const {
  return entries_[r * cols_ + c](m1 + geom_->band(), m2 + geom_->band());
}

Matrix SpectralField::mean() const {
  Matrix m(rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      m(r, c) = entries_[r * cols_ + c](geom_->band(), geom_->band());
  return m;
}

SpectralField SpectralField::dz() const {
  SpectralField out = *this;
  for (auto& e : out.entries_) e = e.cwiseProduct(geom_->dz_multiplier());
  return out;
}

SpectralField SpectralField::dzbar() const {
  SpectralField out = *this;
  for (auto& e : out.entries_) e = e.cwiseProduct(geom_->dzbar_multiplier());
  return out;
}

SpectralField SpectralField::dagger() const {
  SpectralField out(*geom_, cols_, rows_);
  int K = geom_->modes();
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) {
      const Matrix& src = entries_[r * cols_ + c];
      Matrix& dst = out.entries_[c * rows_ + r];
      for (int i = 0; i < K; ++i)
        for (int j = 0; j < K; ++j)
          dst(i, j) = std::conj(src(K - 1 - i, K - 1 - j));
    }
  return out;
}

GridField SpectralField::to_grid() const {
  GridField g(*geom_, rows_, cols_);
  const Matrix& E = geom_->eval_matrix();
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      g.entry(r, c) = E * entries_[r * cols_ + c] * E.transpose();
  return g;
}

SpectralField SpectralField::from_grid(const TorusGeometry& geom,
                                       const GridField& g) {
  SpectralField f(geom, g.rows(), g.cols());
  const Matrix& P = geom.project_matrix();
  for (int r = 0; r < f.rows_; ++r)
    for (int c = 0; c < f.cols_; ++c)
      f.entries_[r * f.cols_ + c] = P * g.entry(r, c) * P.transpose();
  return f;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  for (size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  for (size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(cx s) {
  for (auto& e : entries_) e *= s;
  return *this;
}

double SpectralField::sup_abs() const { return to_grid().sup_abs(); }

double SpectralField::coef_norm() const {
  double acc = 0;
  for (const auto& e : entries_) acc += e.squaredNorm();
  return std::sqrt(acc);
}

double SpectralField::tail_fraction() const {
  double tail = 0, total = 0;
  int N = geom_->band();
  for (const auto& e : entries_)
    for (int i = 0; i < e.rows(); ++i)
      for (int j = 0; j < e.cols(); ++j) {
        double a = std::norm(e(i, j));
        total += a;
        if (std::abs(i - N) == N || std::abs(j - N) == N) tail += a;
      }
  return total > 0 ? tail / total : 0.0;
}

Vector SpectralField::flatten() const {
  int K = geom_->modes();
  Vector v(static_cast<long>(entries_.size()) * K * K);
  long at = 0;
  for (const auto& e : entries_) {
    v.segment(at, K * K) = Eigen::Map<const Vector>(e.data(), K * K);
    at += static_cast<long>(K) * K;
  }
  return v;
}

SpectralField SpectralField::unflatten(const TorusGeometry& geom, int rows,
                                       int cols, const Vector& v) {
  SpectralField f(geom, rows, cols);
  int K = geom.modes();
  long at = 0;
  for (auto& e : f.entries_) {
    e = Eigen::Map<const Matrix>(v.data() + at, K, K);
    at += static_cast<long>(K) * K;
  }
  return f;
}

GridField::GridField(const TorusGeometry& geom, int rows, int cols)
    : geom_(&geom), rows_(rows), cols_(cols) {
  entries_.assign(static_cast<size_t>(rows) * cols,
                  Matrix::Zero(geom.grid(), geom.grid()));
}

GridField GridField::matmul(const GridField& o) const {
  GridField out(*geom_, rows_, o.cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < o.cols_; ++c) {
      Matrix acc = Matrix::Zero(geom_->grid(), geom_->grid());
      for (int k = 0; k < cols_; ++k)
        acc += entry(r, k).cwiseProduct(o.entry(k, c));
      out.entry(r, c) = acc;
    }
  return out;
}

GridField GridField::dagger() const {
  GridField out(*geom_, cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) out.entry(c, r) = entry(r, c).conjugate();
  return out;
}

namespace {

template <class F>
GridField pointwise_matrix_function(const GridField& in, bool hermitian, F&& f) {
  const TorusGeometry& geom = in.geom();
  int d = in.rows();
  GridField out(geom, d, d);
  int M = geom.grid();
  if (d == 1) {
    Eigen::ArrayXXcd a = in.entry(0, 0).array();
    Matrix& o = out.entry(0, 0);
    o.resize(M, M);
    for (int i = 0; i < M; ++i)
      for (int j = 0; j < M; ++j) o(i, j) = f(a(i, j));
    return out;
  }
  Matrix point(d, d);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) point(r, c) = in.entry(r, c)(i, j);
      Matrix val;
      if (hermitian) {
        Matrix sym = 0.5 * (point + point.adjoint().eval());
        Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
        Eigen::VectorXcd lam(es.eigenvalues().size());
        for (int t = 0; t < lam.size(); ++t) lam[t] = f(cx(es.eigenvalues()[t]));
        val = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
      } else {
        val = point.inverse();  // only the inverse reaches this branch
      }
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) out.entry(r, c)(i, j) = val(r, c);
    }
  return out;
}

}  // namespace

GridField GridField::inverse() const {
  if (rows_ == 1 && cols_ == 1)
    return pointwise_matrix_function(*this, false,
                                     [](cx v) { return cx(1.0) / v; });
  return pointwise_matrix_function(*this, false, [](cx v) { return v; });
}

GridField GridField::herm_sqrt() const {
  return pointwise_matrix_function(*this, true,
                                   [](cx v) { return std::sqrt(v.real()); });
}

GridField GridField::herm_inv_sqrt() const {
  return pointwise_matrix_function(
      *this, true, [](cx v) { return 1.0 / std::sqrt(v.real()); });
}

GridField GridField::herm_exp() const {
  return pointwise_matrix_function(*this, true,
                                   [](cx v) { return std::exp(v.real()); });
}

GridField GridField::herm_log() const {
  return pointwise_matrix_function(*this, true,
                                   [](cx v) { return std::log(v.real()); });
}

GridField GridField::hermitize() const {
  GridField out(*geom_, rows_, cols_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c)
      out.entry(r, c) = 0.5 * (entry(r, c) + entry(c, r).conjugate());
  return out;
}

GridField& GridField::operator+=(const GridField& o) {
  for (size_t i = 0; i < entries_.size(); ++i) entries_[i] += o.entries_[i];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  for (size_t i = 0; i < entries_.size(); ++i) entries_[i] -= o.entries_[i];
  return *this;
}

GridField& GridField::operator*=(cx s) {
  for (auto& e : entries_) e *= s;
  return *this;
}

Matrix GridField::trace() const {
  Matrix t = Matrix::Zero(geom_->grid(), geom_->grid());
  for (int r = 0; r < std::min(rows_, cols_); ++r) t += entry(r, r);
  return t;
}

cx GridField::integral_scalar() const {
  if (rows_ != 1 || cols_ != 1)
    throw std::logic_error("integral_scalar needs a 1x1 field");
  return geom_->area() * entry(0, 0).mean();
}

double GridField::sup_abs() const {
  double m = 0;
  for (const auto& e : entries_) m = std::max(m, e.cwiseAbs().maxCoeff());
  return m;
}

double GridField::min_herm_eigenvalue() const {
  int d = rows_;
  int M = geom_->grid();
  double lo = std::numeric_limits<double>::max();
  Matrix point(d, d);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) point(r, c) = entry(r, c)(i, j);
      Eigen::SelfAdjointEigenSolver<Matrix> es(
          (0.5 * (point + point.adjoint())).eval());
      lo = std::min(lo, es.eigenvalues().minCoeff());
    }
  return lo;
}

SpectralField spectral_mul(const SpectralField& a, const SpectralField& b) {
  return SpectralField::from_grid(a.geom(), a.to_grid().matmul(b.to_grid()));
}

GridField grid_metric_adjoint(const GridField& psi, const GridField& h_tail_inv,
                              const GridField& h_head) {
  return h_tail_inv.matmul(psi.dagger()).matmul(h_head);
}

}  // namespace qmod
