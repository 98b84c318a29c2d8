#include "qmod/metrics.hpp"

#include <Eigen/Eigenvalues>

namespace qmod {

MetricAssignment MetricAssignment::identity(const Representation& rep) {
  MetricAssignment m;
  m.h.reserve(rep.dims.size());
  for (int d : rep.dims) m.h.push_back(Matrix::Identity(d, d));
  return m;
}

void MetricAssignment::validate(const Representation& rep,
                                double herm_tol) const {
  if (h.size() != rep.dims.size())
    throw QuiverError("metric count does not match vertex count");
  for (size_t v = 0; v < h.size(); ++v) {
    const Matrix& m = h[v];
    if (m.rows() != rep.dims[v] || m.cols() != rep.dims[v])
      throw QuiverError("metric shape mismatch at vertex " + std::to_string(v));
    if (m.size() == 0) continue;
    if (sup_abs(m - m.adjoint()) > herm_tol * std::max(1.0, sup_abs(m)))
      throw QuiverError("metric is not Hermitian at vertex " + std::to_string(v));
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw QuiverError("metric is not positive definite at vertex " +
                        std::to_string(v));
  }
}

Matrix metric_adjoint(const Matrix& phi, const Matrix& h_tail,
                      const Matrix& h_head) {
  if (h_tail.rows() != phi.cols() || h_head.rows() != phi.rows())
    throw QuiverError("metric_adjoint: shape mismatch");
  return h_tail.llt().solve(phi.adjoint() * h_head);
}

std::vector<Matrix> moment_residual(const Quiver& q, const Representation& rep,
                                    const MetricAssignment& metrics,
                                    const StabilityParameters& params) {
  std::vector<Matrix> res(q.num_vertices());
  std::vector<Matrix> adj(q.num_arrows());
  for (int a = 0; a < q.num_arrows(); ++a)
    adj[a] = metric_adjoint(rep.maps[a], metrics.h[q.tail(a)],
                            metrics.h[q.head(a)]);
  for (int v = 0; v < q.num_vertices(); ++v) {
    int d = rep.dims[v];
    Matrix m = Matrix::Zero(d, d);
    for (int a : q.arrows_into(v)) m += rep.maps[a] * adj[a];
    for (int a : q.arrows_out_of(v)) m -= adj[a] * rep.maps[a];
    m -= params.tau_prime[v] * Matrix::Identity(d, d);
    res[v] = m;
  }
  return res;
}

double residual_norm(const std::vector<Matrix>& res) {
  double worst = 0.0;
  for (const auto& m : res) worst = std::max(worst, sup_abs(m));
  return worst;
}

}  // namespace qmod
