#pragma once

#include "qmod/mpoly.hpp"
#include "qmod/toruscomplex.hpp"

namespace qmod {

/// Polynomial family of torus quiver bundles in the offset variable around a
/// base point: Dolbeault deformations alpha_v(u) and morphisms phi_a(u),
/// holomorphic for the deformed structures identically in u up to the stated
/// truncation order.
struct TorusFamilySpec {
  int params = 0;
  Vector base;
  double stencil_step = 3e-3;
  std::vector<int> ranks;
  std::vector<MPoly<SpectralField>> alpha;  // per vertex
  std::vector<MPoly<SpectralField>> phi;    // per arrow

  TorusBundle at(const TorusGeometry& geom, const Vector& offset) const;
  TorusBundle derivative_at(const TorusGeometry& geom, int dir,
                            const Vector& offset) const;
  TorusFamilySpec reparameterized(const Matrix& linear,
                                  const std::vector<Matrix>& quadratic) const;
  double holomorphy_residual_on_stencil(const TorusGeometry& geom,
                                        const Quiver& q) const;
};

/// Builds phi_a(u) from prescribed zero-mode polynomials by solving the
/// holomorphy equation order by order in u in Fourier space. With a trivial
/// base Dolbeault structure the solve is mode-diagonal; otherwise a dense
/// least-squares per arrow is used. A nonzero cokernel component (the
/// obstruction to lifting the prescribed data) is reported, never projected
/// away silently.
struct CompletionReport {
  double obstruction = 0.0;  // largest zero-mode residual encountered
  int order = 0;             // truncation order in u
};

TorusFamilySpec complete_torus_family(
    const TorusGeometry& geom, const Quiver& q, const std::vector<int>& ranks,
    std::vector<MPoly<SpectralField>> alpha,
    const std::vector<MPoly<Matrix>>& phi_mode0, const Vector& base,
    double stencil_step, int extra_order, CompletionReport* report = nullptr);

/// Pointwise evaluation of a relation on torus morphism fields.
SpectralField torus_evaluate_relation(const TorusGeometry& geom, const Quiver& q,
                                      const TorusBundle& bundle,
                                      const Relation& r);
double torus_relation_residual(const TorusGeometry& geom, const Quiver& q,
                               const TorusBundle& bundle, const RelationSet& rels);

}  // namespace qmod
