#pragma once

#include <optional>

#include "qmod/quiver.hpp"

namespace qmod {

/// Stability data. tau_prime (one real per vertex) is the primitive input:
/// it is the right-hand side of the vortex equation. sigma/tau describe the
/// associated filtration weights when the caller has them; they are only
/// checked against each other, never derived.
struct StabilityParameters {
  std::vector<double> tau_prime;                // per vertex
  std::optional<std::vector<double>> sigma;     // filtration steps, length m
  std::optional<std::vector<double>> tau;       // filtration weights, length m+1
};

/// sigma-slope of a filtration given cumulative ranks [rk F_0, ..., rk F_m]
/// and total degree: (deg + sum_j sigma_j rk F_j) / rk F_m.
double sigma_slope(const std::vector<long>& ranks, double deg,
                   const std::vector<double>& sigma);

struct FeasibilityReport {
  double trace_sum = 0.0;            // sum_lambda tau'_lambda d_lambda
  bool trace_ok = false;
  std::vector<double> sigma_values;  // tau_{j+1} - tau_j when tau present
  bool sigma_positive = true;        // all sigma > 0 (vacuous if absent)
  bool sigma_consistent = true;      // sigma matches tau differences
  bool feasible = false;
  double tol = 1e-12;
};

FeasibilityReport check_feasibility(const Quiver& q,
                                    const std::vector<int>& dims,
                                    const StabilityParameters& params,
                                    double tol = 1e-12);

}  // namespace qmod
