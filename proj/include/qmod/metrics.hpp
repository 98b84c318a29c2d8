#pragma once

#include "qmod/representation.hpp"
#include "qmod/stability.hpp"

namespace qmod {

/// Hermitian positive definite fiber metrics, one per vertex.
struct MetricAssignment {
  std::vector<Matrix> h;  // per vertex, d_lambda x d_lambda

  static MetricAssignment identity(const Representation& rep);
  void validate(const Representation& rep, double herm_tol = 1e-13) const;
};

/// Metric adjoint phi* = h_tail^{-1} phi^dagger h_head, the adjoint with
/// respect to <.,.>_{h_tail} and <.,.>_{h_head}.
Matrix metric_adjoint(const Matrix& phi, const Matrix& h_tail,
                      const Matrix& h_head);

/// Per-vertex moment map defect of the absolute-case vortex equation:
///   sum_{h(a)=v} phi_a phi_a* - sum_{t(a)=v} phi_a* phi_a - tau'_v I.
/// Each block is h_v-self-adjoint.
std::vector<Matrix> moment_residual(const Quiver& q, const Representation& rep,
                                    const MetricAssignment& metrics,
                                    const StabilityParameters& params);

/// Sup over vertices of the elementwise residual magnitude.
double residual_norm(const std::vector<Matrix>& res);

}  // namespace qmod
