#include "qmod/pointbackend.hpp"

#include <limits>

namespace qmod {

PointFamilyBackend::PointFamilyBackend(const Quiver& q, RelationSet relations,
                                       FamilySpec family,
                                       StabilityParameters params,
                                       FlowOptions flow)
    : q_(&q),
      relations_(std::move(relations)),
      family_(std::move(family)),
      params_(std::move(params)),
      flow_(flow) {
  // Stencil solves need residuals well below the finite-difference scale.
  flow_.tol = std::min(flow_.tol, 1e-12);
  double rel = family_.relation_residual_on_stencil(q, relations_);
  if (rel > 1e-10)
    throw QuiverError("family violates relations on the stencil, residual " +
                      std::to_string(rel));
}

const PointFamilyBackend::Snapshot& PointFamilyBackend::snapshot(
    const Vector& offset) {
  OffsetKey key(offset);
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;

  auto snap = std::make_unique<Snapshot>();
  snap->rep = family_.at(offset);

  // Warm start from the nearest solved stencil point.
  MetricAssignment h0 = MetricAssignment::identity(snap->rep);
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
  auto [h, report] = flow_to_vortex(*q_, snap->rep, params_, flow_, h0);
  if (report.verdict != FlowVerdict::converged)
    throw QuiverError(std::string("vortex flow did not converge at stencil point: ") +
                      to_string(report.verdict));
  snap->metrics = h;
  snap->flow = report;
  snap->complex = std::make_unique<PointComplex>(*q_, snap->rep, snap->metrics,
                                                 relations_);

  int k = family_.params;
  snap->mu.reserve(k);
  for (int i = 0; i < k; ++i) {
    Representation dphi = family_.derivative_at(i, offset);
    ArrowBlocks naive(q_->num_arrows());
    for (int a = 0; a < q_->num_arrows(); ++a) naive[a] = -dphi.maps[a];
    snap->mu.push_back(snap->complex->harmonic_projection1(naive));
  }
  snap->gram = Matrix::Zero(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      snap->gram(i, j) = snap->complex->inner1(snap->mu[i], snap->mu[j]);
  snap->gram = 0.5 * (snap->gram + Matrix(snap->gram.adjoint()));

  auto [pos, _] = cache_.emplace(key, std::move(snap));
  return *pos->second;
}

Vector PointFamilyBackend::flatten_arrows(const ArrowBlocks& b) const {
  long total = 0;
  for (const auto& m : b) total += m.size();
  Vector out(total);
  long at = 0;
  for (const auto& m : b) {
    out.segment(at, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
    at += m.size();
  }
  return out;
}

ArrowBlocks PointFamilyBackend::unflatten_arrows(const Vector& v) const {
  ArrowBlocks out(q_->num_arrows());
  long at = 0;
  for (int a = 0; a < q_->num_arrows(); ++a) {
    int r = family_.dims[q_->head(a)], c = family_.dims[q_->tail(a)];
    out[a] = Eigen::Map<const Matrix>(v.data() + at, r, c);
    at += static_cast<long>(r) * c;
  }
  return out;
}

Vector PointFamilyBackend::flatten_vertices(const VertexBlocks& b) const {
  long total = 0;
  for (const auto& m : b) total += m.size();
  Vector out(total);
  long at = 0;
  for (const auto& m : b) {
    out.segment(at, m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
    at += m.size();
  }
  return out;
}

VertexBlocks PointFamilyBackend::unflatten_vertices(const Vector& v) const {
  VertexBlocks out(q_->num_vertices());
  long at = 0;
  for (int w = 0; w < q_->num_vertices(); ++w) {
    int d = family_.dims[w];
    out[w] = Eigen::Map<const Matrix>(v.data() + at, d, d);
    at += static_cast<long>(d) * d;
  }
  return out;
}

PointFamilyBackend::C1 PointFamilyBackend::connection_action(
    const Quiver& q, const VertexBlocks& a, const C1& psi) {
  C1 out(psi.size());
  for (int ar = 0; ar < q.num_arrows(); ++ar)
    out[ar] = a[q.head(ar)] * psi[ar] - psi[ar] * a[q.tail(ar)];
  return out;
}

VertexBlocks PointFamilyBackend::connection_at_center(int k) {
  Wirtinger<Vector> w(family_.params, family_.stencil_step,
                      [this](const Vector& s) {
                        return flatten_vertices(snapshot(s).metrics.h);
                      });
  VertexBlocks dh = unflatten_vertices(w.d_holo(k, zero_offset()));
  const auto& h = snapshot(zero_offset()).metrics.h;
  VertexBlocks a(q_->num_vertices());
  for (int v = 0; v < q_->num_vertices(); ++v)
    a[v] = h[v].size() ? Matrix(h[v].llt().solve(dh[v])) : dh[v];
  return a;
}

PointFamilyBackend::C1 PointFamilyBackend::mu_ik(int i, int k) {
  Wirtinger<Vector> w(family_.params, family_.stencil_step,
                      [this, i](const Vector& s) {
                        return flatten_arrows(snapshot(s).mu[i]);
                      });
  C1 dmu = unflatten_arrows(w.d_holo(k, zero_offset()));
  VertexBlocks a = connection_at_center(k);
  C1 conn = connection_action(*q_, a, mu(i));
  for (size_t ar = 0; ar < dmu.size(); ++ar) dmu[ar] += conn[ar];
  return dmu;
}

PointFamilyBackend PointFamilyBackend::reparameterized(
    const ReparamData& rep) const {
  FamilySpec fam = family_.reparameterized(rep.linear, rep.quadratic);
  return PointFamilyBackend(*q_, relations_, std::move(fam), params_, flow_);
}

}  // namespace qmod
