#include "qmod/bundle.hpp"

namespace qmod {

double TorusBundle::holomorphy_residual(const Quiver& q) const {
  double worst = 0.0;
  for (int a = 0; a < q.num_arrows(); ++a) {
    SpectralField res = phi[a].dzbar();
    res += spectral_mul(alpha[q.head(a)], phi[a]);
    res -= spectral_mul(phi[a], alpha[q.tail(a)]);
    worst = std::max(worst, res.sup_abs());
  }
  return worst;
}

SpectralField chern_connection_z(const SpectralField& h,
                                 const SpectralField& alpha) {
  const TorusGeometry& geom = h.geom();
  GridField hg = h.to_grid();
  GridField hinv = hg.inverse();
  GridField a = hinv.matmul(h.dz().to_grid());
  a -= hinv.matmul(alpha.dagger().to_grid()).matmul(hg);
  return SpectralField::from_grid(geom, a);
}

SpectralField curvature_form(const TorusGeometry& geom, const SpectralField& h,
                             const SpectralField& alpha) {
  SpectralField a = chern_connection_z(h, alpha);
  SpectralField f = alpha.dz() - a.dzbar();
  f += spectral_mul(a, alpha);
  f -= spectral_mul(alpha, a);
  return f;
}

std::vector<SpectralField> vortex_residual_torus(
    const TorusGeometry& geom, const Quiver& q, const TorusBundle& bundle,
    const TorusMetrics& metrics, const StabilityParameters& params) {
  std::vector<GridField> h(q.num_vertices()), hinv(q.num_vertices());
  for (int v = 0; v < q.num_vertices(); ++v) {
    h[v] = metrics.h[v].to_grid();
    hinv[v] = h[v].inverse();
  }
  std::vector<SpectralField> out(q.num_vertices());
  for (int v = 0; v < q.num_vertices(); ++v) {
    double nv = q.weight(v);
    SpectralField f = curvature_form(geom, metrics.h[v], bundle.alpha[v]);
    GridField acc = f.to_grid();
    acc *= cx(nv * geom.g_inverse());
    for (int a : q.arrows_into(v)) {
      GridField phi = bundle.phi[a].to_grid();
      GridField adj = grid_metric_adjoint(phi, hinv[q.tail(a)], h[v]);
      acc += phi.matmul(adj);
    }
    for (int a : q.arrows_out_of(v)) {
      GridField phi = bundle.phi[a].to_grid();
      GridField adj = grid_metric_adjoint(phi, hinv[v], h[q.head(a)]);
      acc -= adj.matmul(phi);
    }
    GridField id_term = SpectralField::constant(
        geom, (params.tau_prime[v] *
               Matrix::Identity(bundle.ranks[v], bundle.ranks[v]))
                  .eval())
                            .to_grid();
    acc -= id_term;
    out[v] = SpectralField::from_grid(geom, acc);
  }
  return out;
}

double torus_residual_sup(const std::vector<SpectralField>& res) {
  double worst = 0.0;
  for (const auto& r : res) worst = std::max(worst, r.sup_abs());
  return worst;
}

TorusMetrics identity_metrics(const TorusGeometry& geom,
                              const std::vector<int>& ranks) {
  TorusMetrics m;
  for (int r : ranks)
    m.h.push_back(SpectralField::constant(geom, Matrix::Identity(r, r)));
  return m;
}

namespace {

double residual_functional(const std::vector<SpectralField>& res) {
  double acc = 0.0;
  for (const auto& r : res) acc += r.coef_norm() * r.coef_norm();
  return acc;
}

// Fourier preconditioner: divide the mode (m1, m2) of the step by
// 1 + dt (n_v / 2) kappa(m) with kappa the nonnegative metric Laplacian
// symbol, which treats the stiff part of the flow implicitly.
SpectralField precondition(const TorusGeometry& geom, const SpectralField& s,
                           double dt, double nv) {
  SpectralField out = s;
  int N = geom.band();
  for (int r = 0; r < s.rows(); ++r)
    for (int c = 0; c < s.cols(); ++c)
      for (int m1 = -N; m1 <= N; ++m1)
        for (int m2 = -N; m2 <= N; ++m2) {
          double kappa =
              2.0 * geom.g_inverse() * std::norm(geom.lambda_z(m1, m2));
          out.coef(r, c, m1, m2) /= 1.0 + dt * 0.5 * nv * kappa;
        }
  return out;
}

double log_bound(const TorusMetrics& h) {
  double worst = 0.0;
  for (const auto& m : h.h) {
    GridField logh = m.to_grid().herm_log();
    worst = std::max(worst, logh.sup_abs());
  }
  return worst;
}

}  // namespace

std::pair<TorusMetrics, FlowReport> heat_flow_torus(
    const TorusGeometry& geom, const Quiver& q, const TorusBundle& bundle,
    const StabilityParameters& params, const TorusFlowOptions& opts,
    const TorusMetrics& h0) {
  FlowReport report;

  std::vector<int> dims = bundle.ranks;
  auto feas = check_feasibility(q, dims, params);
  if (!feas.trace_ok) {
    report.verdict = FlowVerdict::infeasible;
    report.reason = "trace constraint: sum tau'_v r_v = " +
                    std::to_string(feas.trace_sum);
    return {h0, report};
  }

  // The flow conserves the overall scalar (the summed mean log-determinants),
  // so no gauge renormalization is needed; warm starts inherit the scale.
  TorusMetrics h = h0;
  auto m = vortex_residual_torus(geom, q, bundle, h, params);
  double fn = residual_functional(m);
  report.residual = torus_residual_sup(m);
  double dt = opts.step;

  for (long it = 0; it < opts.max_iters; ++it) {
    if (report.residual <= opts.tol) {
      report.verdict = FlowVerdict::converged;
      report.iterations = it;
      return {h, report};
    }

    TorusMetrics trial = h;
    for (int v = 0; v < q.num_vertices(); ++v) {
      // S = h^{-1/2} (h m) h^{-1/2} is pointwise Hermitian; step through the
      // exponential to stay on the positive cone.
      GridField hg = h.h[v].to_grid();
      GridField sqrth = hg.herm_sqrt();
      GridField invsqrth = hg.herm_inv_sqrt();
      GridField hm = hg.matmul(m[v].to_grid());
      GridField s = invsqrth.matmul(hm).matmul(invsqrth).hermitize();
      SpectralField s_spec = SpectralField::from_grid(geom, s);
      s_spec = precondition(geom, s_spec, dt, q.weight(v));
      GridField expo = (cx(-dt) * s_spec.to_grid()).hermitize().herm_exp();
      GridField next = sqrth.matmul(expo).matmul(sqrth).hermitize();
      trial.h[v] = SpectralField::from_grid(geom, next);
    }
    auto m_trial = vortex_residual_torus(geom, q, bundle, trial, params);
    double fn_trial = residual_functional(m_trial);

    if (fn_trial > fn * (1.0 + 1e-14) && dt > 1e-6 * opts.step) {
      dt *= 0.5;
      ++report.step_rejections;
      continue;
    }

    h = std::move(trial);
    m = std::move(m_trial);
    fn = fn_trial;
    report.residual = torus_residual_sup(m);
    report.iterations = it + 1;
    if (dt < opts.step) dt = std::min(opts.step, dt * 1.3);

    double lb = log_bound(h);
    report.log_eig_min = -lb;
    report.log_eig_max = lb;
    if (lb > opts.divergence_bound) {
      report.verdict = FlowVerdict::diverged;
      report.reason = "log h exceeded divergence bound";
      return {h, report};
    }
  }
  report.verdict = FlowVerdict::max_iters;
  return {h, report};
}

std::pair<TorusMetrics, FlowReport> heat_flow_torus(
    const TorusGeometry& geom, const Quiver& q, const TorusBundle& bundle,
    const StabilityParameters& params, const TorusFlowOptions& opts) {
  return heat_flow_torus(geom, q, bundle, params, opts,
                         identity_metrics(geom, bundle.ranks));
}

}  // namespace qmod
