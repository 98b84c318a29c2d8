#pragma once

#include <optional>

#include "qmod/bundle.hpp"
#include "qmod/quiver.hpp"

namespace qmod {

struct TCochain0 {
  std::vector<SpectralField> xi;  // per vertex, End-valued (0,0)
};

struct TCochain1 {
  std::vector<SpectralField> chi;   // per arrow, Hom-valued (0,0)
  std::vector<SpectralField> zeta;  // per vertex, End-valued dzbar coefficient
};

struct TCochain2 {
  std::vector<SpectralField> chi2;  // per arrow, Hom-valued dzbar coefficient
};

/// Elliptic deformation complex of a quiver bundle over the torus. On a
/// one-dimensional X the (0,2) component is absent, so level two consists of
/// the arrow-indexed (0,1) forms alone. All operators act on band-limited
/// fields, with products de-aliased on the quadrature grid.
class TorusComplex {
 public:
  TorusComplex(const TorusGeometry& geom, const Quiver& q, TorusBundle bundle,
               TorusMetrics metrics, double kernel_tol = 1e-8);

  const TorusGeometry& geom() const { return *geom_; }
  const Quiver& quiver() const { return *q_; }
  const TorusBundle& bundle() const { return bundle_; }
  const TorusMetrics& metrics() const { return metrics_; }

  TCochain0 zero0() const;
  TCochain1 zero1() const;
  TCochain2 zero2() const;

  // Covariant Dolbeault operators of the deformed structures and their
  // formal adjoints through the Chern connections.
  SpectralField dbar_end(int v, const SpectralField& x) const;
  SpectralField dbar_hom(int a, const SpectralField& x) const;
  SpectralField dbar_star_end(int v, const SpectralField& z) const;
  SpectralField dbar_star_hom(int a, const SpectralField& x) const;

  TCochain1 delta(const TCochain0& xi) const;          // weighted commutator only
  TCochain0 delta_adjoint(const TCochain1& c) const;   // phi-part only

  TCochain1 d0(const TCochain0& xi) const;
  TCochain2 d1(const TCochain1& c) const;
  TCochain0 d0_adjoint(const TCochain1& c) const;
  TCochain1 d1_adjoint(const TCochain2& c) const;

  TCochain0 laplacian0(const TCochain0& xi) const;
  TCochain0 laplacian0_closed_form(const TCochain0& xi) const;
  TCochain1 hodge1(const TCochain1& c) const;
  TCochain2 hodge2(const TCochain2& c) const;

  cx inner0(const TCochain0& x, const TCochain0& y) const;
  cx inner1(const TCochain1& x, const TCochain1& y) const;
  cx inner2(const TCochain2& x, const TCochain2& y) const;
  double norm0(const TCochain0& x) const;
  double norm1(const TCochain1& x) const;
  double norm2(const TCochain2& x) const;

  TCochain0 vee(const TCochain1& u, const TCochain1& v) const;
  TCochain2 sym_wedge(const TCochain1& u, const TCochain1& v) const;

  // Dense Hodge theory on the truncated spaces (assembled lazily; intended
  // for modest band limits).
  TCochain0 harmonic_projection0(const TCochain0& x);
  TCochain0 greens0(const TCochain0& x);
  TCochain1 harmonic_projection1(const TCochain1& x);
  TCochain1 greens1(const TCochain1& x);
  TCochain2 greens2(const TCochain2& x);
  bool greens_gap_warning(int level);
  struct HyperDims {
    int h0 = 0, h1 = 0, h2 = 0;
  };
  HyperDims hyperdims();

  Vector flatten0(const TCochain0& x) const;
  TCochain0 unflatten0(const Vector& v) const;
  Vector flatten1(const TCochain1& x) const;
  TCochain1 unflatten1(const Vector& v) const;
  Vector flatten2(const TCochain2& x) const;
  TCochain2 unflatten2(const Vector& v) const;
  int dim0() const { return dim0_; }
  int dim1() const { return dim1_; }
  int dim2() const { return dim2_; }

  const SpectralField& connection_z(int v) const { return a_z_[v]; }
  const GridField& metric_grid(int v) const { return h_grid_[v]; }
  const GridField& metric_inv_grid(int v) const { return hinv_grid_[v]; }
  const GridField& morphism_adjoint_grid(int a) const { return phi_star_[a]; }

 private:
  struct LevelSpectrum {
    Eigen::VectorXd evals;
    Matrix vecs;      // W-orthonormal eigenvectors
    Matrix gram;      // W
    double cut = 0.0;
    bool gap_warning = false;
  };
  LevelSpectrum& level(int lvl);
  Vector spectral_apply(int lvl, const Vector& x, bool greens);

  const TorusGeometry* geom_;
  const Quiver* q_;
  TorusBundle bundle_;
  TorusMetrics metrics_;
  double kernel_tol_;

  std::vector<GridField> h_grid_, hinv_grid_, alpha_grid_;
  std::vector<SpectralField> a_z_;
  std::vector<GridField> a_z_grid_;
  std::vector<GridField> phi_grid_, phi_star_;
  int dim0_ = 0, dim1_ = 0, dim2_ = 0;
  std::optional<LevelSpectrum> spectra_[3];
};

}  // namespace qmod
