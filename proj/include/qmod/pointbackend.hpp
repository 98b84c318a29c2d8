#pragma once

#include <map>
#include <memory>

#include "qmod/family.hpp"
#include "qmod/pointcomplex.hpp"
#include "qmod/wp.hpp"

namespace qmod {

/// Absolute-case (X = point) family backend: solves the moment equation on a
/// stencil of parameter values, constructs harmonic Kodaira-Spencer
/// representatives by projection, and exposes the Hodge pairings needed by
/// the Weil-Petersson layer. All cochain derivatives in the base direction
/// are Chern-covariant with respect to the solved metrics.
class PointFamilyBackend {
 public:
  using C0 = VertexBlocks;
  using C1 = ArrowBlocks;

  struct Snapshot {
    Representation rep;
    MetricAssignment metrics;
    std::unique_ptr<PointComplex> complex;
    std::vector<ArrowBlocks> mu;
    Matrix gram;
    FlowReport flow;
  };

  PointFamilyBackend(const Quiver& q, RelationSet relations, FamilySpec family,
                     StabilityParameters params, FlowOptions flow = {});

  int num_params() const { return family_.params; }
  double fd_step() const { return family_.stencil_step; }
  const FamilySpec& family() const { return family_; }

  const Snapshot& snapshot(const Vector& offset);
  const PointComplex& center() { return *snapshot(zero_offset()).complex; }

  Matrix gram(const Vector& offset) { return snapshot(offset).gram; }
  const C1& mu(int i) { return snapshot(zero_offset()).mu[i]; }
  C1 mu_ik(int i, int k);

  C0 vee(const C1& u, const C1& v) { return center().vee(u, v); }
  C0 greens0(const C0& x) { return center().greens0(x); }
  cx inner0(const C0& x, const C0& y) { return center().inner0(x, y); }
  cx inner1(const C1& x, const C1& y) { return center().inner1(x, y); }
  double norm0(const C0& x) { return center().norm0(x); }
  double norm1(const C1& x) { return center().norm1(x); }
  C1 harmonic1(const C1& x) { return center().harmonic_projection1(x); }
  cx wedge_green_pairing(int, int, int, int) { return cx(0.0); }

  /// Covariant s-derivative of an arrow tuple field given per-vertex
  /// connection coefficients a_k = h^{-1} d_k h.
  static C1 connection_action(const Quiver& q, const VertexBlocks& a,
                              const C1& psi);

  /// Connection coefficients at the center in direction k.
  VertexBlocks connection_at_center(int k);

  PointFamilyBackend reparameterized(const ReparamData& rep) const;

  Vector zero_offset() const { return Vector::Zero(family_.params); }

 private:
  Vector flatten_arrows(const ArrowBlocks& b) const;
  ArrowBlocks unflatten_arrows(const Vector& v) const;
  Vector flatten_vertices(const VertexBlocks& b) const;
  VertexBlocks unflatten_vertices(const Vector& v) const;

  const Quiver* q_;
  RelationSet relations_;
  FamilySpec family_;
  StabilityParameters params_;
  FlowOptions flow_;
  std::map<OffsetKey, std::unique_ptr<Snapshot>> cache_;
};

}  // namespace qmod
