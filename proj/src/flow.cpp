#include "qmod/flow.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qmod {

namespace {

double residual_functional(const std::vector<Matrix>& m) {
  // sum_v tr(m_v m_v) with m_v self-adjoint w.r.t. h_v; real and >= 0.
  double acc = 0.0;
  for (const auto& b : m) acc += (b * b).trace().real();
  return acc;
}

void normalize_gauge(const Representation& rep, MetricAssignment& h) {
  for (size_t v = 0; v < h.h.size(); ++v) {
    int d = rep.dims[v];
    if (d == 0) continue;
    double det = h.h[v].determinant().real();
    if (det <= 0.0) return;  // positivity guard will handle it
    double c = std::pow(det, -1.0 / d);
    for (auto& m : h.h) m *= c;
    return;
  }
}

// h <- h^{1/2} exp(-dt h^{-1/2} (h m) h^{-1/2}) h^{1/2}; exact on the cone of
// positive metrics for any step.
void apply_step(const std::vector<Matrix>& m, double dt, MetricAssignment& h) {
  for (size_t v = 0; v < h.h.size(); ++v) {
    if (h.h[v].size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.h[v]);
    Matrix sqrt_h = es.operatorSqrt();
    Matrix inv_sqrt_h = es.operatorInverseSqrt();
    Matrix sym = inv_sqrt_h * (h.h[v] * m[v]) * inv_sqrt_h;
    sym = 0.5 * (sym + Matrix(sym.adjoint()));
    Eigen::SelfAdjointEigenSolver<Matrix> es2(sym);
    Matrix expo = es2.eigenvectors() *
                  (-dt * es2.eigenvalues().array()).exp().matrix().asDiagonal() *
                  es2.eigenvectors().adjoint();
    h.h[v] = sqrt_h * expo * sqrt_h;
    h.h[v] = 0.5 * (h.h[v] + Matrix(h.h[v].adjoint()));
  }
}

void log_spectrum_bounds(const MetricAssignment& h, const MetricAssignment& h0,
                         double* lo, double* hi) {
  *lo = 0.0;
  *hi = 0.0;
  for (size_t v = 0; v < h.h.size(); ++v) {
    if (h.h[v].size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Matrix> es0(h0.h[v]);
    Matrix w = es0.operatorInverseSqrt();
    Eigen::SelfAdjointEigenSolver<Matrix> es(w * h.h[v] * w);
    for (int i = 0; i < es.eigenvalues().size(); ++i) {
      double l = std::log(std::max(es.eigenvalues()[i], 1e-300));
      *lo = std::min(*lo, l);
      *hi = std::max(*hi, l);
    }
  }
}

}  // namespace

const char* to_string(FlowVerdict v) {
  switch (v) {
    case FlowVerdict::converged: return "converged";
    case FlowVerdict::diverged: return "diverged";
    case FlowVerdict::max_iters: return "max_iters";
    case FlowVerdict::infeasible: return "infeasible";
  }
  return "?";
}

const char* to_string(StabilityVerdict v) {
  switch (v) {
    case StabilityVerdict::polystable_evidence: return "polystable-evidence";
    case StabilityVerdict::unstable_evidence: return "unstable-evidence";
    case StabilityVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

std::pair<MetricAssignment, FlowReport> flow_to_vortex(
    const Quiver& q, const Representation& rep,
    const StabilityParameters& params, const FlowOptions& opts,
    const MetricAssignment& h0) {
  rep.validate(q);
  h0.validate(rep);
  FlowReport report;

  auto feas = check_feasibility(q, rep.dims, params);
  if (!feas.trace_ok) {
    report.verdict = FlowVerdict::infeasible;
    report.reason = "trace constraint: sum tau'_v d_v = " +
                    std::to_string(feas.trace_sum);
    return {h0, report};
  }

  MetricAssignment h = h0;
  if (opts.normalize_gauge) normalize_gauge(rep, h);

  std::vector<Matrix> m = moment_residual(q, rep, h, params);
  double fn = residual_functional(m);
  report.residual = residual_norm(m);
  double dt = opts.step;

  for (long it = 0; it < opts.max_iters; ++it) {
    if (report.residual <= opts.tol) {
      report.verdict = FlowVerdict::converged;
      report.iterations = it;
      log_spectrum_bounds(h, h0, &report.log_eig_min, &report.log_eig_max);
      return {h, report};
    }

    MetricAssignment trial = h;
    apply_step(m, dt, trial);
    if (opts.normalize_gauge) normalize_gauge(rep, trial);
    std::vector<Matrix> m_trial = moment_residual(q, rep, trial, params);
    double fn_trial = residual_functional(m_trial);

    if (fn_trial > fn * (1.0 + 1e-14) && dt > 1e-8 * opts.step) {
      dt *= 0.5;
      ++report.step_rejections;
      continue;
    }

    h = std::move(trial);
    m = std::move(m_trial);
    fn = fn_trial;
    report.residual = residual_norm(m);
    if (dt < opts.step) dt = std::min(opts.step, dt * 1.25);

    log_spectrum_bounds(h, h0, &report.log_eig_min, &report.log_eig_max);
    if (std::max(std::abs(report.log_eig_min), report.log_eig_max) >
        opts.divergence_bound) {
      report.verdict = FlowVerdict::diverged;
      report.iterations = it + 1;
      report.reason = "log h exceeded divergence bound";
      return {h, report};
    }
    report.iterations = it + 1;
  }

  report.verdict = FlowVerdict::max_iters;
  return {h, report};
}

namespace {

// Closure of seed spans under all arrow maps; returns per-vertex orthonormal
// bases of the generated subrepresentation.
std::vector<Matrix> generate_subrep(const Quiver& q, const Representation& rep,
                                    std::vector<Matrix> span) {
  const double rank_tol = 1e-9;
  auto orth = [&](const Matrix& cols) -> Matrix {
    if (cols.cols() == 0) return cols;
    Eigen::ColPivHouseholderQR<Matrix> qr(cols);
    qr.setThreshold(rank_tol);
    long r = qr.rank();
    Matrix Q = qr.householderQ() * Matrix::Identity(cols.rows(), r);
    return Q;
  };
  for (auto& s : span) s = orth(s);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int a = 0; a < q.num_arrows(); ++a) {
      int t = q.tail(a), hd = q.head(a);
      if (span[t].cols() == 0) continue;
      Matrix image = rep.maps[a] * span[t];
      Matrix joint(rep.dims[hd], span[hd].cols() + image.cols());
      joint << span[hd], image;
      Matrix grown = orth(joint);
      if (grown.cols() > span[hd].cols()) {
        span[hd] = grown;
        changed = true;
      }
    }
  }
  return span;
}

}  // namespace

StabilityProbeResult stability_probe(const Quiver& q, const Representation& rep,
                                     const StabilityParameters& params,
                                     int budget, std::uint64_t seed,
                                     const FlowOptions& opts) {
  StabilityProbeResult result;

  int total_dim = 0;
  for (int d : rep.dims) total_dim += d;

  // Pass 2 first: a destabilizer is cheap to find and decisive.
  std::vector<std::vector<Matrix>> seeds;
  for (int v = 0; v < q.num_vertices(); ++v) {
    for (int i = 0; i < rep.dims[v]; ++i) {
      std::vector<Matrix> s(q.num_vertices());
      for (int w = 0; w < q.num_vertices(); ++w) s[w] = Matrix(rep.dims[w], 0);
      s[v] = Matrix::Zero(rep.dims[v], 1);
      s[v](i, 0) = 1.0;
      seeds.push_back(std::move(s));
    }
    if (rep.dims[v] > 1) {
      std::vector<Matrix> s(q.num_vertices());
      for (int w = 0; w < q.num_vertices(); ++w) s[w] = Matrix(rep.dims[w], 0);
      s[v] = Matrix::Identity(rep.dims[v], rep.dims[v]);
      seeds.push_back(std::move(s));
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int b = 0; b < budget; ++b) {
    std::vector<Matrix> s(q.num_vertices());
    for (int w = 0; w < q.num_vertices(); ++w) s[w] = Matrix(rep.dims[w], 0);
    std::uniform_int_distribution<int> pick(0, q.num_vertices() - 1);
    int v = pick(rng);
    if (rep.dims[v] == 0) continue;
    Matrix col(rep.dims[v], 1);
    for (int i = 0; i < rep.dims[v]; ++i) col(i, 0) = cx(gauss(rng), gauss(rng));
    s[v] = col;
    seeds.push_back(std::move(s));
  }

  for (auto& s : seeds) {
    std::vector<Matrix> sub = generate_subrep(q, rep, s);
    int sub_dim = 0;
    double pairing = 0.0;
    std::vector<int> dims(q.num_vertices());
    for (int v = 0; v < q.num_vertices(); ++v) {
      dims[v] = static_cast<int>(sub[v].cols());
      sub_dim += dims[v];
      pairing += params.tau_prime[v] * dims[v];
    }
    if (sub_dim == 0 || sub_dim == total_dim) continue;
    if (pairing < -1e-10) {
      StabilityWitness w;
      w.sub_dims = dims;
      w.quotient_dims.resize(q.num_vertices());
      for (int v = 0; v < q.num_vertices(); ++v)
        w.quotient_dims[v] = rep.dims[v] - dims[v];
      w.pairing = pairing;
      result.witness = w;
      result.verdict = StabilityVerdict::unstable_evidence;
      return result;
    }
  }

  auto [h, flow] = flow_to_vortex(q, rep, params, opts);
  result.flow = flow;
  if (flow.verdict == FlowVerdict::converged) {
    result.verdict = StabilityVerdict::polystable_evidence;
  } else if (flow.verdict == FlowVerdict::diverged ||
             flow.verdict == FlowVerdict::infeasible) {
    result.verdict = StabilityVerdict::unstable_evidence;
  } else {
    result.verdict = StabilityVerdict::inconclusive;
  }
  return result;
}

}  // namespace qmod
