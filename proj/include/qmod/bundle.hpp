#pragma once

#include "qmod/flow.hpp"
#include "qmod/torus.hpp"

namespace qmod {

/// Quiver bundle data on the torus: all bundles are smooth-trivial of degree
/// zero; the holomorphic structure on the vertex bundle is dbar + alpha_v and
/// the arrow morphisms are matrix-valued functions, holomorphic for the
/// deformed structures.
struct TorusBundle {
  std::vector<int> ranks;             // per vertex
  std::vector<SpectralField> alpha;   // per vertex, End-valued dzbar coefficient
  std::vector<SpectralField> phi;     // per arrow, Hom-valued function

  double holomorphy_residual(const Quiver& q) const;
};

struct TorusMetrics {
  std::vector<SpectralField> h;  // per vertex, Hermitian positive
};

/// Chern connection (1,0)-coefficient a_z = h^{-1} dz h - h^{-1} alpha^dag h.
SpectralField chern_connection_z(const SpectralField& h,
                                 const SpectralField& alpha);

/// Curvature coefficient F_{z zbar} of (dbar + alpha, h):
///   F = dz(alpha) - dzbar(a_z) + [a_z, alpha].
SpectralField curvature_form(const TorusGeometry& geom, const SpectralField& h,
                             const SpectralField& alpha);

/// Pointwise vortex defect per vertex:
///   n_v g^{1bar1} F_{z zbar} + sum_h phi phi* - sum_t phi* phi - tau'_v.
std::vector<SpectralField> vortex_residual_torus(const TorusGeometry& geom,
                                                 const Quiver& q,
                                                 const TorusBundle& bundle,
                                                 const TorusMetrics& metrics,
                                                 const StabilityParameters& params);

double torus_residual_sup(const std::vector<SpectralField>& res);

struct TorusFlowOptions {
  double step = 0.25;
  long max_iters = 20000;
  double tol = 1e-10;
  double divergence_bound = 40.0;
};

/// Semi-implicit metric flow dh/dt = -h m(h) with the Laplacian part of the
/// residual treated implicitly in Fourier space.
std::pair<TorusMetrics, FlowReport> heat_flow_torus(
    const TorusGeometry& geom, const Quiver& q, const TorusBundle& bundle,
    const StabilityParameters& params, const TorusFlowOptions& opts,
    const TorusMetrics& h0);

std::pair<TorusMetrics, FlowReport> heat_flow_torus(
    const TorusGeometry& geom, const Quiver& q, const TorusBundle& bundle,
    const StabilityParameters& params, const TorusFlowOptions& opts = {});

TorusMetrics identity_metrics(const TorusGeometry& geom,
                              const std::vector<int>& ranks);

}  // namespace qmod
