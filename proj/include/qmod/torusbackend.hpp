#pragma once

#include <map>
#include <memory>

#include "qmod/fd.hpp"
#include "qmod/torusfamily.hpp"
#include "qmod/wp.hpp"

namespace qmod {

/// Torus family backend: solves the full vortex equation (curvature term
/// included) on a stencil of parameter values and realizes the harmonic
/// Kodaira-Spencer representatives through the covariant derivatives of the
/// solved family metrics. Non-empty relation sets are outside the Hodge
/// machinery here and are rejected.
class TorusFamilyBackend {
 public:
  using C0 = TCochain0;
  using C1 = TCochain1;

  struct Snapshot {
    TorusBundle bundle;
    TorusMetrics metrics;
    std::unique_ptr<TorusComplex> complex;
    FlowReport flow;
  };

  TorusFamilyBackend(const TorusGeometry& geom, const Quiver& q,
                     TorusFamilySpec family, StabilityParameters params,
                     TorusFlowOptions flow = {});

  int num_params() const { return family_.params; }
  double fd_step() const { return family_.stencil_step; }
  const TorusGeometry& geom() const { return *geom_; }
  const TorusFamilySpec& family() const { return family_; }
  const Quiver& quiver() const { return *q_; }
  const StabilityParameters& stability() const { return params_; }

  Snapshot& snapshot(const Vector& offset);
  TorusComplex& center() { return *snapshot(zero_offset()).complex; }

  /// Chern connection coefficients a_i = h^{-1} d_i h per vertex, by
  /// Richardson stencils of the solved metrics.
  std::vector<SpectralField> connection_s(int dir, const Vector& offset);

  /// Harmonic representative mu_i = (-phi_{;i}, sqrt(n) F_{i zbar} dzbar).
  C1 mu_at(int i, const Vector& offset);
  const C1& mu(int i);
  C1 mu_ik(int i, int k);

  /// Mixed base-direction curvature F_{i jbar} per vertex (s-s component).
  C0 ss_curvature(int i, int j);

  Matrix gram(const Vector& offset);

  C0 vee(const C1& u, const C1& v) { return center().vee(u, v); }
  C0 greens0(const C0& x) { return center().greens0(x); }
  cx inner0(const C0& x, const C0& y) { return center().inner0(x, y); }
  cx inner1(const C1& x, const C1& y) { return center().inner1(x, y); }
  double norm0(const C0& x) { return center().norm0(x); }
  double norm1(const C1& x) { return center().norm1(x); }
  C1 harmonic1(const C1& x) { return center().harmonic_projection1(x); }
  cx wedge_green_pairing(int i, int j, int k, int l);

  TorusFamilyBackend reparameterized(const ReparamData& rep) const;

  Vector zero_offset() const { return Vector::Zero(family_.params); }

 private:
  Vector flatten_metrics(const TorusMetrics& m) const;

  const TorusGeometry* geom_;
  const Quiver* q_;
  TorusFamilySpec family_;
  StabilityParameters params_;
  TorusFlowOptions flow_;
  std::map<OffsetKey, std::unique_ptr<Snapshot>> cache_;
  std::map<int, C1> mu_center_;
  std::map<std::pair<int, int>, TCochain2> wedge_cache_;
};

}  // namespace qmod
