#include "qmod/forms.hpp"

namespace qmod {

namespace {

constexpr double kPi = 3.14159265358979323846;

int wedge_sign(unsigned a, unsigned b) {
  // Sign of merging two ordered index sets: each element of b moves past the
  // elements of a with a larger canonical index.
  int inversions = 0;
  for (int jb = 0; jb < 4; ++jb) {
    if (!(b & (1u << jb))) continue;
    for (int ja = jb + 1; ja < 4; ++ja)
      if (a & (1u << ja)) ++inversions;
  }
  return (inversions % 2 == 0) ? 1 : -1;
}

}  // namespace

const SpectralField& FormOnProduct::comp(unsigned mask) const {
  static const SpectralField empty;
  auto it = comps_.find(mask);
  return it == comps_.end() ? empty : it->second;
}

void FormOnProduct::set(unsigned mask, SpectralField f) {
  comps_[mask] = std::move(f);
}

void FormOnProduct::add(unsigned mask, const SpectralField& f) {
  auto it = comps_.find(mask);
  if (it == comps_.end())
    comps_.emplace(mask, f);
  else
    it->second += f;
}

FormOnProduct FormOnProduct::wedge(const FormOnProduct& o) const {
  FormOnProduct out(*geom_, rows_, o.cols_);
  for (const auto& [ma, fa] : comps_)
    for (const auto& [mb, fb] : o.comps_) {
      if (ma & mb) continue;
      SpectralField prod = spectral_mul(fa, fb);
      if (wedge_sign(ma, mb) < 0) prod *= cx(-1.0);
      out.add(ma | mb, prod);
    }
  return out;
}

FormOnProduct FormOnProduct::traced() const {
  FormOnProduct out(*geom_, 1, 1);
  for (const auto& [m, f] : comps_) {
    GridField g = f.to_grid();
    GridField scalar(*geom_, 1, 1);
    scalar.entry(0, 0) = g.trace();
    out.add(m, SpectralField::from_grid(*geom_, scalar));
  }
  return out;
}

FormOnProduct& FormOnProduct::operator+=(const FormOnProduct& o) {
  for (const auto& [m, f] : o.comps_) add(m, f);
  return *this;
}

FormOnProduct& FormOnProduct::operator-=(const FormOnProduct& o) {
  for (const auto& [m, f] : o.comps_) {
    SpectralField neg = f;
    neg *= cx(-1.0);
    add(m, neg);
  }
  return *this;
}

FormOnProduct& FormOnProduct::operator*=(cx s) {
  for (auto& [m, f] : comps_) f *= s;
  return *this;
}

std::map<unsigned, cx> FormOnProduct::fiber_integral() const {
  std::map<unsigned, cx> out;
  for (const auto& [m, f] : comps_) {
    if (!(m & kDz) || !(m & kDzbar)) continue;
    if (f.rows() != 1 || f.cols() != 1)
      throw QuiverError("fiber_integral expects traced (1x1) coefficients");
    // dz ^ dzbar integrates to -2i Im(tau) over the periodicity square.
    cx value = cx(0, -2.0 * geom_->modulus().imag()) * f.mean()(0, 0);
    out[m & ~(kDz | kDzbar)] += value;
  }
  return out;
}

double FormOnProduct::max_component_norm() const {
  double worst = 0;
  for (const auto& [m, f] : comps_) worst = std::max(worst, f.sup_abs());
  return worst;
}

FormOnProduct kaehler_form(const TorusGeometry& geom) {
  FormOnProduct w(geom, 1, 1);
  w.set(FormOnProduct::kDz | FormOnProduct::kDzbar,
        SpectralField::constant(
            geom, Matrix::Constant(1, 1, cx(0, 1) * geom.g_metric())));
  return w;
}

FormOnProduct curvature_on_product(TorusFamilyBackend& backend, int vertex) {
  const TorusGeometry& geom = backend.geom();
  auto& snap = backend.snapshot(backend.zero_offset());
  const Quiver& q = snap.complex->quiver();
  int r = snap.bundle.ranks[vertex];
  FormOnProduct W(geom, r, r);

  W.set(FormOnProduct::kDz | FormOnProduct::kDzbar,
        curvature_form(geom, snap.metrics.h[vertex], snap.bundle.alpha[vertex]));

  // F_{s zbar} is the harmonic representative's vertex component over
  // sqrt(n); the canonical (dzbar, ds) slot flips the sign of ds ^ dzbar.
  SpectralField f_szbar = backend.mu(0).zeta[vertex];
  f_szbar *= cx(-1.0 / std::sqrt(q.weight(vertex)));
  W.set(FormOnProduct::kDzbar | FormOnProduct::kDs, f_szbar);

  // F_{z sbar} = -d_sbar a_z by a stencil of the Chern connection.
  Wirtinger<Vector> wz(1, backend.fd_step(), [&](const Vector& s) {
    auto& sn = backend.snapshot(s);
    return chern_connection_z(sn.metrics.h[vertex], sn.bundle.alpha[vertex])
        .flatten();
  });
  Vector da = wz.d_anti(0, backend.zero_offset());
  SpectralField f_zsbar =
      SpectralField::unflatten(geom, r, r, (-da).eval());
  W.set(FormOnProduct::kDz | FormOnProduct::kDsbar, f_zsbar);

  TCochain0 fss = backend.ss_curvature(0, 0);
  W.set(FormOnProduct::kDs | FormOnProduct::kDsbar, fss.xi[vertex]);
  return W;
}

FormOnProduct chern_character(const FormOnProduct& curvature, int rank) {
  const TorusGeometry& geom = curvature.geom();
  cx unit = cx(0, 1) / (2.0 * kPi);
  FormOnProduct ch(geom, 1, 1);
  ch.set(0, SpectralField::constant(geom, Matrix::Constant(1, 1, cx(rank))));
  FormOnProduct c1 = curvature.traced();
  c1 *= unit;
  ch += c1;
  FormOnProduct sq = curvature.wedge(curvature).traced();
  sq *= 0.5 * unit * unit;
  ch += sq;
  return ch;
}

VirtualCh VirtualCh::operator+(const VirtualCh& o) const {
  VirtualCh out = *this;
  out.ch += o.ch;
  return out;
}

VirtualCh VirtualCh::operator-(const VirtualCh& o) const {
  VirtualCh out = *this;
  out.ch -= o.ch;
  return out;
}

VirtualCh VirtualCh::operator*(const VirtualCh& o) const {
  VirtualCh out;
  out.ch = ch.wedge(o.ch);
  return out;
}

VirtualCh VirtualCh::tensor_power(int m) const {
  VirtualCh acc = virtual_unit(ch.geom());
  for (int i = 0; i < m; ++i) acc = acc * *this;
  return acc;
}

VirtualCh virtual_unit(const TorusGeometry& geom) {
  return virtual_constant(geom, cx(1.0));
}

VirtualCh virtual_constant(const TorusGeometry& geom, cx c) {
  VirtualCh v;
  v.ch = FormOnProduct(geom, 1, 1);
  v.ch.set(0, SpectralField::constant(geom, Matrix::Constant(1, 1, c)));
  return v;
}

VirtualCh virtual_polarization(const TorusGeometry& geom) {
  VirtualCh v = virtual_unit(geom);
  v.ch += kaehler_form(geom);
  return v;
}

VirtualCh virtual_bundle(const FormOnProduct& curvature, int rank) {
  VirtualCh v;
  v.ch = chern_character(curvature, rank);
  return v;
}

namespace {

// chi(s) = int_X sum_a tr(phi_a phi_a*) w_X at a stencil point.
cx morphism_potential(TorusFamilyBackend& backend, const Vector& s) {
  auto& sn = backend.snapshot(s);
  const Quiver& q = sn.complex->quiver();
  cx acc = 0;
  for (int a = 0; a < q.num_arrows(); ++a) {
    GridField phi = sn.bundle.phi[a].to_grid();
    GridField adj = sn.complex->morphism_adjoint_grid(a);
    acc += backend.geom().area() * phi.matmul(adj).trace().mean();
  }
  return acc;
}

}  // namespace

FiberIntegralReport wp_via_fiber_integral(TorusFamilyBackend& backend) {
  if (backend.num_params() != 1)
    throw QuiverError("fiber-integral formulas are assembled for k = 1");
  const TorusGeometry& geom = backend.geom();
  const Quiver& q = backend.snapshot(backend.zero_offset()).complex->quiver();
  const StabilityParameters& params = backend.stability();
  FiberIntegralReport rep;

  Matrix g = backend.gram(backend.zero_offset());
  rep.g_eqwp = g(0, 0);

  FormOnProduct wx = kaehler_form(geom);
  constexpr unsigned kSS = FormOnProduct::kDs | FormOnProduct::kDsbar;

  cx fb1 = 0, fb2 = 0;
  for (int v = 0; v < q.num_vertices(); ++v) {
    double nv = q.weight(v);
    FormOnProduct W = curvature_on_product(backend, v);

    auto sq = W.wedge(W).traced().fiber_integral();
    cx t1 = 0.5 * nv * sq[kSS];
    rep.term_curv2 += t1;
    fb1 += t1;

    auto lin = W.traced().wedge(wx).fiber_integral();
    cx t2 = cx(0, 1) * params.tau_prime[v] * lin[kSS];
    rep.term_tau += t2;
    fb1 += t2;

    // Chern character version, times 4 pi^2.
    cx unit = cx(0, 1) / (2.0 * kPi);
    FormOnProduct ch2 = W.wedge(W).traced();
    ch2 *= 0.5 * unit * unit;
    auto ch2_int = ch2.fiber_integral();
    fb2 += -nv * ch2_int[kSS] * cx(4.0 * kPi * kPi);

    FormOnProduct c1 = W.traced();
    c1 *= unit;
    auto c1_int = c1.wedge(wx).fiber_integral();
    fb2 += (params.tau_prime[v] / (2.0 * kPi)) * c1_int[kSS] *
           cx(4.0 * kPi * kPi);
  }

  // Potential term i d dbar int sum_a tr(phi phi*) w_X, shared verbatim by
  // both displays.
  Wirtinger<cx> chi_outer(1, backend.fd_step(), [&](const Vector& s) {
    Wirtinger<cx> inner(1, backend.fd_step(), [&](const Vector& t) {
      return morphism_potential(backend, t);
    });
    return inner.d_holo(0, s);
  });
  cx ddbar_chi = chi_outer.d_anti(0, backend.zero_offset());
  rep.term_potential = cx(0, 1) * ddbar_chi;
  fb1 += rep.term_potential;
  fb2 += rep.term_potential;

  rep.g_fb1 = fb1 / cx(0, 1);
  rep.g_fb2 = fb2 / cx(0, 1);
  double scale = std::abs(rep.g_eqwp) + 1e-12;
  rep.gap_fb1_eqwp = std::abs(rep.g_fb1 - rep.g_eqwp) / scale;
  rep.gap_fb1_fb2 = std::abs(rep.g_fb1 - rep.g_fb2) / scale;

  // Reconstruction through the metric e^{-chi/2pi} on the trivial base line:
  // its base curvature is d_s d_sbar chi / 2pi, so the potential term equals
  // i 2pi times that curvature coefficient. Second differences amplify the
  // solver noise by 1/step^2, so this self-contained two-route comparison
  // runs on a wider stencil than the tensor assembly.
  double pot_step = std::max(3.0 * backend.fd_step(), 9e-3);
  Wirtinger<cx> chi_wide(1, pot_step, [&](const Vector& s) {
    Wirtinger<cx> inner(1, pot_step, [&](const Vector& t) {
      return morphism_potential(backend, t);
    });
    return inner.d_holo(0, s);
  });
  cx direct = cx(0, 1) * chi_wide.d_anti(0, backend.zero_offset());
  Wirtinger<cx> a_s(1, pot_step, [&](const Vector& s) {
    Wirtinger<cx> inner(1, pot_step, [&](const Vector& t) {
      return std::exp(-morphism_potential(backend, t) / (2.0 * kPi));
    });
    cx h = std::exp(-morphism_potential(backend, s) / (2.0 * kPi));
    return inner.d_holo(0, s) / h;
  });
  cx f_ss = -a_s.d_anti(0, backend.zero_offset());
  cx reconstructed = cx(0, 1) * (2.0 * kPi) * f_ss;
  rep.potential_residual =
      std::abs(reconstructed - direct) / (std::abs(direct) + 1e-12);
  return rep;
}

VirtualChReport virtual_ch_checks(TorusFamilyBackend& backend, int vertex) {
  const TorusGeometry& geom = backend.geom();
  auto& snap = backend.snapshot(backend.zero_offset());
  int r = snap.bundle.ranks[vertex];
  FormOnProduct W = curvature_on_product(backend, vertex);
  constexpr unsigned kTop = FormOnProduct::kDz | FormOnProduct::kDzbar |
                            FormOnProduct::kDs | FormOnProduct::kDsbar;

  VirtualCh unit = virtual_unit(geom);
  VirtualCh L = virtual_polarization(geom);

  cx u1 = cx(0, 1) / (2.0 * kPi);

  // Direct route: ch(End E) via the adjoint curvature traces,
  // tr_End(exp(ad W)) = r^2 + (2 r tr(W^W) - 2 tr W ^ tr W) (i/2pi)^2 / 2.
  FormOnProduct trW = W.traced();
  FormOnProduct trWW = W.wedge(W).traced();
  FormOnProduct endDeg4 = trWW;
  endDeg4 *= cx(2.0 * r);
  FormOnProduct trWtrW = trW.wedge(trW);
  trWtrW *= cx(-2.0);
  endDeg4 += trWtrW;
  endDeg4 *= 0.5 * u1 * u1;
  VirtualCh chEnd = virtual_constant(geom, cx(r) * cx(r));
  chEnd.ch += endDeg4;

  // Combinator route ingredients from ch(E).
  VirtualCh ch2_part = virtual_constant(geom, cx(0.0));
  {
    FormOnProduct ch2 = trWW;
    ch2 *= 0.5 * u1 * u1;
    ch2_part.ch += ch2;
  }
  VirtualCh c1_part = virtual_constant(geom, cx(0.0));
  {
    FormOnProduct c1 = trW;
    c1 *= u1;
    c1_part.ch += c1;
  }

  auto top_norm = [&](const FormOnProduct& f) {
    return f.has(kTop) ? f.comp(kTop).sup_abs() : 0.0;
  };

  VirtualChReport rep;
  VirtualCh lhs1 = chEnd - virtual_constant(geom, cx(r) * cx(r));
  VirtualCh rhs1 =
      virtual_constant(geom, cx(2.0 * r)) * ch2_part - c1_part * c1_part;
  rep.end_identity = top_norm((lhs1 - rhs1).ch);
  rep.scale = std::max({top_norm(rhs1.ch), top_norm(c1_part.ch), 1e-30});

  // det E through its line curvature tr W.
  VirtualCh det = virtual_bundle(trW, 1);
  VirtualCh lhs2 = (det - unit) * (det - unit);
  VirtualCh rhs2 = c1_part * c1_part;
  rep.det_square_identity = top_norm((lhs2 - rhs2).ch);

  // E0 is pulled back from {x0} x S and carries the trivial metric, so its
  // determinant has vanishing Chern form; the twist is ch(det E) - 1.
  VirtualCh det0_inv = virtual_unit(geom);
  VirtualCh twist = det * det0_inv - unit;
  VirtualCh lhs3 = twist * (L - unit);
  VirtualCh rhs3 = c1_part * (L - unit);
  rep.twist_c1_identity = top_norm((lhs3 - rhs3).ch);

  VirtualCh lhs4 = twist * twist;
  rep.twist_square_identity = top_norm((lhs4 - rhs2).ch);

  // Varying x0 keeps the pullback flat, so the twisted sides are unchanged.
  VirtualCh twist_alt = det * virtual_unit(geom) - unit;
  rep.x0_invariance = top_norm(((twist_alt * (L - unit)) - lhs3).ch);
  return rep;
}

}  // namespace qmod
