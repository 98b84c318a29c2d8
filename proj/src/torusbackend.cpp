#include "qmod/torusbackend.hpp"

#include <limits>

namespace qmod {

TorusFamilyBackend::TorusFamilyBackend(const TorusGeometry& geom,
                                       const Quiver& q, TorusFamilySpec family,
                                       StabilityParameters params,
                                       TorusFlowOptions flow)
    : geom_(&geom),
      q_(&q),
      family_(std::move(family)),
      params_(std::move(params)),
      flow_(flow) {
  flow_.tol = std::min(flow_.tol, 1e-11);
  double hol = family_.holomorphy_residual_on_stencil(geom, q);
  if (hol > 1e-8)
    throw QuiverError("torus family is not holomorphic on the stencil: " +
                      std::to_string(hol));
}

TorusFamilyBackend::Snapshot& TorusFamilyBackend::snapshot(
    const Vector& offset) {
  OffsetKey key(offset);
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;

  auto snap = std::make_unique<Snapshot>();
  snap->bundle = family_.at(*geom_, offset);

  // Warm start from the nearest solved stencil point.
  TorusMetrics h0 = identity_metrics(*geom_, snap->bundle.ranks);
  double best = std::numeric_limits<double>::max();
  for (const auto& [k, cached] : cache_) {
    double d2 = 0.0;
    for (int i = 0; i < offset.size(); ++i) {
      double dr = k.re_im[2 * i] - offset[i].real();
      double di = k.re_im[2 * i + 1] - offset[i].imag();
      d2 += dr * dr + di * di;
    }
    if (d2 < best) {
      best = d2;
      h0 = cached->metrics;
    }
  }
  auto [h, report] =
      heat_flow_torus(*geom_, *q_, snap->bundle, params_, flow_, h0);
  if (report.verdict != FlowVerdict::converged)
    throw QuiverError(
        std::string("torus vortex flow did not converge at stencil point: ") +
        to_string(report.verdict));
  snap->metrics = h;
  snap->flow = report;
  snap->complex =
      std::make_unique<TorusComplex>(*geom_, *q_, snap->bundle, snap->metrics);

  auto [pos, _] = cache_.emplace(key, std::move(snap));
  return *pos->second;
}

Vector TorusFamilyBackend::flatten_metrics(const TorusMetrics& m) const {
  long total = 0;
  for (const auto& f : m.h) total += f.flatten().size();
  Vector out(total);
  long at = 0;
  for (const auto& f : m.h) {
    Vector part = f.flatten();
    out.segment(at, part.size()) = part;
    at += part.size();
  }
  return out;
}

std::vector<SpectralField> TorusFamilyBackend::connection_s(
    int dir, const Vector& offset) {
  Wirtinger<Vector> w(family_.params, family_.stencil_step,
                      [this](const Vector& s) {
                        return flatten_metrics(snapshot(s).metrics);
                      });
  Vector dh_flat = w.d_holo(dir, offset);
  std::vector<SpectralField> out;
  const auto& snap = snapshot(offset);
  long at = 0;
  int K = geom_->modes();
  for (int v = 0; v < q_->num_vertices(); ++v) {
    int d = family_.ranks[v];
    long len = static_cast<long>(d) * d * K * K;
    SpectralField dh =
        SpectralField::unflatten(*geom_, d, d, dh_flat.segment(at, len));
    at += len;
    GridField hinv = snap.metrics.h[v].to_grid().inverse();
    out.push_back(SpectralField::from_grid(*geom_, hinv.matmul(dh.to_grid())));
  }
  return out;
}

TorusFamilyBackend::C1 TorusFamilyBackend::mu_at(int i, const Vector& offset) {
  Snapshot& snap = snapshot(offset);
  std::vector<SpectralField> a = connection_s(i, offset);
  TorusBundle dphi = family_.derivative_at(*geom_, i, offset);

  C1 mu = snap.complex->zero1();
  for (int ar = 0; ar < q_->num_arrows(); ++ar) {
    int hd = q_->head(ar), tl = q_->tail(ar);
    // phi_{;i} = d_i phi + a_i^{head} phi - phi a_i^{tail}
    SpectralField cov = dphi.phi[ar];
    cov += spectral_mul(a[hd], snap.bundle.phi[ar]);
    cov -= spectral_mul(snap.bundle.phi[ar], a[tl]);
    mu.chi[ar] = cx(-1.0) * cov;
  }
  for (int v = 0; v < q_->num_vertices(); ++v) {
    // F_{i zbar} = d_i alpha - dzbar a_i + [a_i, alpha]
    SpectralField f = dphi.alpha[v] - a[v].dzbar();
    f += spectral_mul(a[v], snap.bundle.alpha[v]);
    f -= spectral_mul(snap.bundle.alpha[v], a[v]);
    f *= cx(std::sqrt(q_->weight(v)));
    mu.zeta[v] = f;
  }
  return mu;
}

const TorusFamilyBackend::C1& TorusFamilyBackend::mu(int i) {
  auto it = mu_center_.find(i);
  if (it != mu_center_.end()) return it->second;
  auto [pos, _] = mu_center_.emplace(i, mu_at(i, zero_offset()));
  return pos->second;
}

TorusFamilyBackend::C1 TorusFamilyBackend::mu_ik(int i, int k) {
  Wirtinger<Vector> w(
      family_.params, family_.stencil_step, [this, i](const Vector& s) {
        return snapshot(s).complex->flatten1(mu_at(i, s));
      });
  C1 dmu = center().unflatten1(w.d_holo(k, zero_offset()));
  std::vector<SpectralField> a = connection_s(k, zero_offset());
  const C1& base = mu(i);
  for (int ar = 0; ar < q_->num_arrows(); ++ar) {
    dmu.chi[ar] += spectral_mul(a[q_->head(ar)], base.chi[ar]);
    dmu.chi[ar] -= spectral_mul(base.chi[ar], a[q_->tail(ar)]);
  }
  for (int v = 0; v < q_->num_vertices(); ++v) {
    dmu.zeta[v] += spectral_mul(a[v], base.zeta[v]);
    dmu.zeta[v] -= spectral_mul(base.zeta[v], a[v]);
  }
  return dmu;
}

TorusFamilyBackend::C0 TorusFamilyBackend::ss_curvature(int i, int j) {
  // F_{i jbar} = -d_jbar a_i (the base-direction Dolbeault data vanishes).
  Wirtinger<Vector> w(family_.params, family_.stencil_step,
                      [this, i](const Vector& s) {
                        std::vector<SpectralField> a = connection_s(i, s);
                        long total = 0;
                        for (const auto& f : a) total += f.flatten().size();
                        Vector out(total);
                        long at = 0;
                        for (const auto& f : a) {
                          Vector part = f.flatten();
                          out.segment(at, part.size()) = part;
                          at += part.size();
                        }
                        return out;
                      });
  Vector da = w.d_anti(j, zero_offset());
  C0 out = center().zero0();
  long at = 0;
  int K = geom_->modes();
  for (int v = 0; v < q_->num_vertices(); ++v) {
    int d = family_.ranks[v];
    long len = static_cast<long>(d) * d * K * K;
    out.xi[v] = cx(-1.0) * SpectralField::unflatten(*geom_, d, d,
                                                    da.segment(at, len));
    at += len;
  }
  return out;
}

Matrix TorusFamilyBackend::gram(const Vector& offset) {
  int k = family_.params;
  std::vector<C1> mus;
  mus.reserve(k);
  for (int i = 0; i < k; ++i) mus.push_back(mu_at(i, offset));
  TorusComplex& cx_at = *snapshot(offset).complex;
  Matrix g(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) g(i, j) = cx_at.inner1(mus[i], mus[j]);
  return 0.5 * (g + Matrix(g.adjoint()));
}

cx TorusFamilyBackend::wedge_green_pairing(int i, int j, int k, int l) {
  auto get_wedge = [&](int a, int b) -> const TCochain2& {
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto it = wedge_cache_.find(key);
    if (it == wedge_cache_.end()) {
      auto [pos, _] =
          wedge_cache_.emplace(key, center().sym_wedge(mu(key.first), mu(key.second)));
      return pos->second;
    }
    return it->second;
  };
  const TCochain2& uik = get_wedge(i, k);
  const TCochain2& ujl = get_wedge(j, l);
  return center().inner2(center().greens2(uik), ujl);
}

TorusFamilyBackend TorusFamilyBackend::reparameterized(
    const ReparamData& rep) const {
  TorusFamilySpec fam = family_.reparameterized(rep.linear, rep.quadratic);
  return TorusFamilyBackend(*geom_, *q_, std::move(fam), params_, flow_);
}

}  // namespace qmod
