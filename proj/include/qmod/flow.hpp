#pragma once

#include <cstdint>
#include <random>

#include "qmod/metrics.hpp"

namespace qmod {

struct FlowOptions {
  double step = 0.05;
  long max_iters = 200000;
  double tol = 1e-9;
  double divergence_bound = 40.0;
  bool normalize_gauge = true;  // fix det h = 1 at the first populated vertex
};

enum class FlowVerdict { converged, diverged, max_iters, infeasible };

const char* to_string(FlowVerdict v);

struct FlowReport {
  FlowVerdict verdict = FlowVerdict::max_iters;
  long iterations = 0;
  double residual = 0.0;
  double log_eig_min = 0.0;  // spectral bounds of log(h rel. h0) over vertices
  double log_eig_max = 0.0;
  long step_rejections = 0;  // shrink events from the monotonicity guard
  std::string reason;
};

/// Explicit Euler metric flow dh/dt = -h m(h) with adaptive step halving
/// whenever the residual functional increases. Converges to a solution of
/// the absolute-case vortex equation when the representation is polystable
/// for tau'; unbounded log h signals the Kempf-Ness instability heuristic.
std::pair<MetricAssignment, FlowReport> flow_to_vortex(
    const Quiver& q, const Representation& rep,
    const StabilityParameters& params, const FlowOptions& opts,
    const MetricAssignment& h0);

inline std::pair<MetricAssignment, FlowReport> flow_to_vortex(
    const Quiver& q, const Representation& rep,
    const StabilityParameters& params, const FlowOptions& opts = {}) {
  return flow_to_vortex(q, rep, params, opts, MetricAssignment::identity(rep));
}

enum class StabilityVerdict { polystable_evidence, unstable_evidence, inconclusive };

const char* to_string(StabilityVerdict v);

struct StabilityWitness {
  std::vector<int> sub_dims;       // dimension vector of the destabilizer
  std::vector<int> quotient_dims;  // complementary dimensions
  double pairing = 0.0;            // sum tau'_v dim W_v (negative for witnesses)
};

struct StabilityProbeResult {
  StabilityVerdict verdict = StabilityVerdict::inconclusive;
  std::optional<StabilityWitness> witness;
  FlowReport flow;
};

/// Two semi-decision passes: flow convergence gives polystable evidence; a
/// generated proper subrepresentation with sum tau'_v dim W_v < 0 gives
/// unstable evidence. Generators are all coordinate vectors, the full space
/// at each vertex, and `budget` random seed vectors.
StabilityProbeResult stability_probe(const Quiver& q, const Representation& rep,
                                     const StabilityParameters& params,
                                     int budget = 8, std::uint64_t seed = 1,
                                     const FlowOptions& opts = {});

}  // namespace qmod
