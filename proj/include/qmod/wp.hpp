#pragma once

#include <array>

#include "qmod/fd.hpp"
#include "qmod/types.hpp"

namespace qmod {

struct Tensor3 {
  int k = 0;
  std::vector<cx> v;
  explicit Tensor3(int kk = 0) : k(kk), v(static_cast<size_t>(kk) * kk * kk) {}
  cx& at(int a, int i, int j) { return v[(static_cast<size_t>(a) * k + i) * k + j]; }
  cx at(int a, int i, int j) const {
    return v[(static_cast<size_t>(a) * k + i) * k + j];
  }
  double max_abs() const {
    double m = 0;
    for (auto& x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

struct Tensor4 {
  int k = 0;
  std::vector<cx> v;
  explicit Tensor4(int kk = 0)
      : k(kk), v(static_cast<size_t>(kk) * kk * kk * kk) {}
  cx& at(int i, int j, int a, int b) {
    return v[((static_cast<size_t>(i) * k + j) * k + a) * k + b];
  }
  cx at(int i, int j, int a, int b) const {
    return v[((static_cast<size_t>(i) * k + j) * k + a) * k + b];
  }
  double max_abs() const {
    double m = 0;
    for (auto& x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

struct CurvatureBreakdown {
  Tensor4 total;
  Tensor4 wedge_term;   // enters with a minus sign
  Tensor4 vee_term_a;   // <G0(mu_i v mu_jbar), mu_l v mu_kbar>
  Tensor4 vee_term_b;   // <G0(mu_i v mu_lbar), mu_j v mu_kbar>
};

struct FdQuality {
  double richardson_disagreement = 0.0;  // estimated truncation error
};

struct ReparamData {
  Matrix linear;                  // A with s = s0 + A t + 1/2 q t t
  std::vector<Matrix> quadratic;  // q^p as k x k matrices
  bool identity = false;
};

struct KahlerReport {
  double antisymmetry_residual = 0.0;  // max |dG_{ij,k} - dG_{kj,i}| (FD)
  double scale = 0.0;
  bool closed = false;
};

struct WpTensors {
  Matrix gram;
  Tensor3 d_gram_formula;
  Tensor3 d_gram_fd;
  double d_gram_gap = 0.0;
  CurvatureBreakdown curvature;
  Tensor4 curvature_fd;
  double curvature_gap = 0.0;
  FdQuality fd_quality;
};

/// Weil-Petersson geometry of a family, generic over the geometric backend.
/// The backend supplies the solved metrics, harmonic Kodaira-Spencer
/// representatives and the Hodge-theoretic pairings; this layer assembles the
/// tensors, the finite-difference oracles and the normal-coordinate
/// reparameterization.
template <class Backend>
class WpGeometry {
 public:
  explicit WpGeometry(Backend& b) : b_(&b), k_(b.num_params()) {}

  int k() const { return k_; }

  Matrix metric() { return b_->gram(Vector::Zero(k_)); }
  Matrix metric_at(const Vector& offset) { return b_->gram(offset); }

  /// dG[a](i,j) = d_a G_{i jbar} by the harmonic-projection formula
  /// <mu_{i;a}, mu_j>.
  Tensor3 derivative_formula() {
    Tensor3 t(k_);
    for (int a = 0; a < k_; ++a)
      for (int i = 0; i < k_; ++i) {
        auto mik = b_->mu_ik(i, a);
        for (int j = 0; j < k_; ++j)
          t.at(a, i, j) = b_->inner1(mik, b_->mu(j));
      }
    return t;
  }

  Tensor3 derivative_fd() {
    Wirtinger<Matrix> w(k_, b_->fd_step(),
                        [this](const Vector& s) { return b_->gram(s); });
    Tensor3 t(k_);
    for (int a = 0; a < k_; ++a) {
      Matrix d = w.d_holo(a, Vector::Zero(k_));
      for (int i = 0; i < k_; ++i)
        for (int j = 0; j < k_; ++j) t.at(a, i, j) = d(i, j);
    }
    return t;
  }

  static double tensor3_gap(const Tensor3& a, const Tensor3& b) {
    double scale = std::max(a.max_abs(), b.max_abs());
    double gap = 0;
    for (size_t i = 0; i < a.v.size(); ++i)
      gap = std::max(gap, std::abs(a.v[i] - b.v[i]));
    return gap / std::max(scale, 1e-12);
  }

  /// Holomorphic quadratic reparameterization s = s0 + A t + 1/2 q t t with
  /// A = G^{-1/2} and q solved linearly so that dG(t0) = 0.
  ReparamData normal_coordinates() {
    Matrix G = metric();
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    if (es.eigenvalues().minCoeff() <= 0)
      throw std::runtime_error("normal_coordinates: singular metric");
    Matrix A = es.operatorInverseSqrt();

    Tensor3 dG = derivative_formula();
    ReparamData rep;
    rep.linear = A;
    rep.quadratic.assign(k_, Matrix::Zero(k_, k_));

    // dG^t_{a i jbar}(0) = sum_{pqr} A_pi conj(A_qj) A_ra dG_{r p qbar}
    //                    + sum_{pq} q^p_{ai} conj(A_qj) G_{p qbar} = 0.
    Matrix M = (G * A.conjugate()).transpose();  // M_{jp} = sum_q conj(A_qj) G_pq
    Eigen::PartialPivLU<Matrix> lu(M);
    double dmax = 0.0;
    for (int a = 0; a < k_; ++a)
      for (int i = 0; i < k_; ++i) {
        Vector rhs = Vector::Zero(k_);
        for (int j = 0; j < k_; ++j) {
          cx acc = 0;
          for (int p = 0; p < k_; ++p)
            for (int q = 0; q < k_; ++q)
              for (int r = 0; r < k_; ++r)
                acc += A(p, i) * std::conj(A(q, j)) * A(r, a) * dG.at(r, p, q);
          rhs[j] = -acc;
        }
        Vector qcol = lu.solve(rhs);
        for (int p = 0; p < k_; ++p) rep.quadratic[p](a, i) = qcol[p];
        dmax = std::max(dmax, rhs.cwiseAbs().maxCoeff());
      }
    // The Kaehler property makes q symmetric; enforce it against FD noise.
    for (int p = 0; p < k_; ++p)
      rep.quadratic[p] = 0.5 * (rep.quadratic[p] + rep.quadratic[p].transpose());
    rep.identity = dmax < 1e-14;
    return rep;
  }

  /// Curvature tensor from harmonic representatives; meaningful at a
  /// normal-coordinate center.
  CurvatureBreakdown curvature_tf() {
    CurvatureBreakdown out;
    out.total = Tensor4(k_);
    out.wedge_term = Tensor4(k_);
    out.vee_term_a = Tensor4(k_);
    out.vee_term_b = Tensor4(k_);

    // Cache vee pairs and their Green's images.
    std::vector<std::vector<typename Backend::C0>> vees(k_);
    std::vector<std::vector<typename Backend::C0>> gvees(k_);
    for (int i = 0; i < k_; ++i) {
      vees[i].reserve(k_);
      for (int j = 0; j < k_; ++j) {
        vees[i].push_back(b_->vee(b_->mu(i), b_->mu(j)));
        gvees[i].push_back(b_->greens0(vees[i].back()));
      }
    }
    for (int i = 0; i < k_; ++i)
      for (int j = 0; j < k_; ++j)
        for (int a = 0; a < k_; ++a)
          for (int l = 0; l < k_; ++l) {
            cx wedge = b_->wedge_green_pairing(i, j, a, l);
            cx ta = b_->inner0(gvees[i][j], vees[l][a]);
            cx tb = b_->inner0(gvees[i][l], vees[j][a]);
            out.wedge_term.at(i, j, a, l) = wedge;
            out.vee_term_a.at(i, j, a, l) = ta;
            out.vee_term_b.at(i, j, a, l) = tb;
            out.total.at(i, j, a, l) = -wedge + ta + tb;
          }
    return out;
  }

  /// Independent oracle: R_{i jbar k lbar} = -d_k d_lbar G_{i jbar} at the
  /// center, by nested Richardson-extrapolated Wirtinger stencils.
  Tensor4 curvature_fd(FdQuality* quality = nullptr) {
    double step = b_->fd_step();
    auto gram_fn = [this](const Vector& s) { return b_->gram(s); };
    Tensor4 out(k_);
    double disagreement = 0.0;
    for (int a = 0; a < k_; ++a) {
      Wirtinger<Matrix> inner(k_, step, gram_fn);
      auto dk_fn = [&, a](const Vector& s) { return inner.d_holo(a, s); };
      Wirtinger<Matrix> outer(k_, step, dk_fn);
      for (int l = 0; l < k_; ++l) {
        Matrix m = outer.d_anti(l, Vector::Zero(k_));
        if (quality) {
          disagreement = std::max(
              disagreement,
              outer.richardson_disagreement(
                  l, Vector::Zero(k_),
                  [](const Matrix& x) { return sup_abs(x); }));
        }
        for (int i = 0; i < k_; ++i)
          for (int j = 0; j < k_; ++j) out.at(i, j, a, l) = -m(i, j);
      }
    }
    if (quality) quality->richardson_disagreement = disagreement;
    return out;
  }

  KahlerReport kahler_check() {
    KahlerReport rep;
    Tensor3 fd = derivative_fd();
    rep.scale = std::max(fd.max_abs(), 1e-12);
    for (int a = 0; a < k_; ++a)
      for (int i = 0; i < k_; ++i)
        for (int j = 0; j < k_; ++j)
          rep.antisymmetry_residual = std::max(
              rep.antisymmetry_residual, std::abs(fd.at(a, i, j) - fd.at(i, a, j)));
    rep.closed = rep.antisymmetry_residual <= 1e-4 * rep.scale;
    return rep;
  }

  double harmonic_mu_ik_norm() {
    double worst = 0.0;
    for (int i = 0; i < k_; ++i)
      for (int a = 0; a < k_; ++a)
        worst = std::max(worst, b_->norm1(b_->harmonic1(b_->mu_ik(i, a))));
    return worst;
  }

  static double kahler_symmetry_residual(const Tensor4& r) {
    double worst = 0.0;
    for (int i = 0; i < r.k; ++i)
      for (int j = 0; j < r.k; ++j)
        for (int a = 0; a < r.k; ++a)
          for (int l = 0; l < r.k; ++l) {
            worst = std::max(worst,
                             std::abs(r.at(i, j, a, l) - r.at(a, j, i, l)));
            worst = std::max(worst,
                             std::abs(r.at(i, j, a, l) - r.at(i, l, a, j)));
            worst = std::max(
                worst, std::abs(r.at(i, j, a, l) -
                                std::conj(r.at(j, i, l, a))));
          }
    return worst;
  }

 private:
  Backend* b_;
  int k_;
};

}  // namespace qmod
