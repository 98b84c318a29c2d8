#include "qmod/stability.hpp"

#include <cmath>

namespace qmod {

double sigma_slope(const std::vector<long>& ranks, double deg,
                   const std::vector<double>& sigma) {
  if (ranks.empty()) throw QuiverError("sigma_slope: empty rank tuple");
  if (sigma.size() + 1 != ranks.size())
    throw QuiverError("sigma_slope: need one sigma per proper filtration step");
  long total = ranks.back();
  if (total <= 0) throw QuiverError("sigma_slope: total rank must be positive");
  double ds = deg;
  for (size_t j = 0; j + 1 < ranks.size(); ++j)
    ds += sigma[j] * static_cast<double>(ranks[j]);
  return ds / static_cast<double>(total);
}

FeasibilityReport check_feasibility(const Quiver& q,
                                    const std::vector<int>& dims,
                                    const StabilityParameters& params,
                                    double tol) {
  if (static_cast<int>(params.tau_prime.size()) != q.num_vertices())
    throw QuiverError("tau_prime size does not match vertex count");
  if (static_cast<int>(dims.size()) != q.num_vertices())
    throw QuiverError("dims size does not match vertex count");

  FeasibilityReport rep;
  rep.tol = tol;
  double scale = 1.0;
  for (int v = 0; v < q.num_vertices(); ++v) {
    rep.trace_sum += params.tau_prime[v] * dims[v];
    scale = std::max(scale, std::abs(params.tau_prime[v] * dims[v]));
  }
  rep.trace_ok = std::abs(rep.trace_sum) <= tol * scale;

  if (params.tau) {
    for (size_t j = 0; j + 1 < params.tau->size(); ++j)
      rep.sigma_values.push_back((*params.tau)[j + 1] - (*params.tau)[j]);
  } else if (params.sigma) {
    rep.sigma_values = *params.sigma;
  }
  if (params.sigma && params.tau) {
    if (params.sigma->size() + 1 != params.tau->size()) {
      rep.sigma_consistent = false;
    } else {
      for (size_t j = 0; j < params.sigma->size(); ++j)
        if (std::abs((*params.sigma)[j] - rep.sigma_values[j]) > tol)
          rep.sigma_consistent = false;
    }
  }
  for (double s : rep.sigma_values)
    if (!(s > 0.0)) rep.sigma_positive = false;

  rep.feasible = rep.trace_ok && rep.sigma_positive && rep.sigma_consistent;
  return rep;
}

}  // namespace qmod
