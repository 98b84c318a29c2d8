#include "qmod/torusfamily.hpp"

#include <Eigen/QR>
#include <algorithm>

namespace qmod {

namespace {

SpectralField eval_poly(const MPoly<SpectralField>& p, const TorusGeometry& geom,
                        int rows, int cols, const Vector& at) {
  return p.eval(at, [&] { return SpectralField(geom, rows, cols); });
}

}  // namespace

TorusBundle TorusFamilySpec::at(const TorusGeometry& geom,
                                const Vector& offset) const {
  TorusBundle b;
  b.ranks = ranks;
  for (size_t v = 0; v < alpha.size(); ++v)
    b.alpha.push_back(eval_poly(alpha[v], geom, ranks[v], ranks[v], offset));
  for (const auto& p : phi) {
    const SpectralField& any = p.terms.begin()->second;
    b.phi.push_back(eval_poly(p, geom, any.rows(), any.cols(), offset));
  }
  return b;
}

TorusBundle TorusFamilySpec::derivative_at(const TorusGeometry& geom, int dir,
                                           const Vector& offset) const {
  TorusBundle b;
  b.ranks = ranks;
  for (size_t v = 0; v < alpha.size(); ++v)
    b.alpha.push_back(
        eval_poly(alpha[v].derivative(dir), geom, ranks[v], ranks[v], offset));
  for (const auto& p : phi) {
    const SpectralField& any = p.terms.begin()->second;
    b.phi.push_back(
        eval_poly(p.derivative(dir), geom, any.rows(), any.cols(), offset));
  }
  return b;
}

TorusFamilySpec TorusFamilySpec::reparameterized(
    const Matrix& linear, const std::vector<Matrix>& quadratic) const {
  TorusFamilySpec out;
  out.params = static_cast<int>(linear.cols());
  out.base = base;
  out.stencil_step = stencil_step;
  out.ranks = ranks;
  auto subs =
      affine_quadratic_substitution(Vector::Zero(params), linear, quadratic);
  for (const auto& p : alpha) out.alpha.push_back(p.compose(subs));
  for (const auto& p : phi) out.phi.push_back(p.compose(subs));
  return out;
}

double TorusFamilySpec::holomorphy_residual_on_stencil(
    const TorusGeometry& geom, const Quiver& q) const {
  double worst = 0.0;
  std::vector<Vector> points;
  points.push_back(Vector::Zero(params));
  for (int i = 0; i < params; ++i) {
    for (cx delta : {cx(stencil_step, 0), cx(-stencil_step, 0),
                     cx(0, stencil_step), cx(0, -stencil_step),
                     cx(2 * stencil_step, 2 * stencil_step)}) {
      Vector v = Vector::Zero(params);
      v[i] = delta;
      points.push_back(v);
    }
  }
  for (const auto& p : points)
    worst = std::max(worst, at(geom, p).holomorphy_residual(q));
  return worst;
}

namespace {

// All exponent vectors of length k with total degree <= deg, ordered by total
// degree so that lower orders are available when solving higher ones.
std::vector<std::vector<int>> exponents_by_degree(int k, int deg) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur(k, 0);
  std::function<void(int, int)> rec = [&](int pos, int remaining) {
    if (pos == k) {
      out.push_back(cur);
      return;
    }
    for (int d = 0; d <= remaining; ++d) {
      cur[pos] = d;
      rec(pos + 1, remaining - d);
    }
    cur[pos] = 0;
  };
  rec(0, deg);
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    int ta = 0, tb = 0;
    for (int x : a) ta += x;
    for (int x : b) tb += x;
    return ta < tb;
  });
  return out;
}

int total_degree(const std::vector<int>& e) {
  int t = 0;
  for (int x : e) t += x;
  return t;
}

}  // namespace

TorusFamilySpec complete_torus_family(
    const TorusGeometry& geom, const Quiver& q, const std::vector<int>& ranks,
    std::vector<MPoly<SpectralField>> alpha,
    const std::vector<MPoly<Matrix>>& phi_mode0, const Vector& base,
    double stencil_step, int extra_order, CompletionReport* report) {
  TorusFamilySpec fam;
  fam.params = alpha.empty() ? (phi_mode0.empty() ? 0 : phi_mode0[0].k)
                             : alpha[0].k;
  fam.base = base;
  fam.stencil_step = stencil_step;
  fam.ranks = ranks;
  fam.alpha = std::move(alpha);

  int alpha_deg = 0;
  for (const auto& p : fam.alpha) alpha_deg = std::max(alpha_deg, p.degree());
  int phi_deg = 0;
  for (const auto& p : phi_mode0) phi_deg = std::max(phi_deg, p.degree());
  int order = alpha_deg + phi_deg + extra_order;
  if (report) report->order = order;

  std::vector<SpectralField> alpha0;
  double alpha0_norm = 0.0;
  for (int v = 0; v < q.num_vertices(); ++v) {
    alpha0.push_back(eval_poly(fam.alpha[v], geom, ranks[v], ranks[v],
                               Vector::Zero(fam.params)));
    alpha0_norm = std::max(alpha0_norm, alpha0.back().sup_abs());
  }
  bool diagonal_solve = alpha0_norm < 1e-14;

  auto expos = exponents_by_degree(fam.params, order);
  double obstruction = 0.0;

  for (int a = 0; a < q.num_arrows(); ++a) {
    int hd = q.head(a), tl = q.tail(a);
    int r = ranks[hd], c = ranks[tl];
    MPoly<SpectralField> phi_poly;
    phi_poly.k = fam.params;

    // Dense operator L = dbar + alpha0_h . - . alpha0_t when needed, with
    // the pinned zero-mode columns removed from the solve.
    Eigen::CompleteOrthogonalDecomposition<Matrix> dense_solver;
    int K = geom.modes();
    long dim = static_cast<long>(r) * c * K * K;
    std::vector<long> free_cols;
    if (!diagonal_solve) {
      if (dim > 4000)
        throw QuiverError(
            "holomorphy completion with a deformed base structure is limited "
            "to small truncated spaces");
      long block = static_cast<long>(K) * K;
      long mode0_in_block = geom.band() + static_cast<long>(K) * geom.band();
      for (long j = 0; j < dim; ++j)
        if (j % block != mode0_in_block) free_cols.push_back(j);
      Matrix L(dim, static_cast<long>(free_cols.size()));
      for (size_t jj = 0; jj < free_cols.size(); ++jj) {
        Vector e = Vector::Zero(dim);
        e[free_cols[jj]] = 1.0;
        SpectralField x = SpectralField::unflatten(geom, r, c, e);
        SpectralField lx = x.dzbar();
        lx += spectral_mul(alpha0[hd], x);
        lx -= spectral_mul(x, alpha0[tl]);
        L.col(jj) = lx.flatten();
      }
      dense_solver.compute(L);
    }

    for (const auto& e : expos) {
      // RHS_m = -sum_{p+q=m, p != 0} (alpha_p phi_q - phi_q alpha_p).
      SpectralField rhs(geom, r, c);
      for (const auto& [pe, pc] : fam.alpha[hd].terms) {
        if (total_degree(pe) == 0) continue;
        std::vector<int> qe(e.size());
        bool ok = true;
        for (size_t i = 0; i < e.size(); ++i) {
          qe[i] = e[i] - pe[i];
          if (qe[i] < 0) ok = false;
        }
        if (!ok) continue;
        auto it = phi_poly.terms.find(qe);
        if (it == phi_poly.terms.end()) continue;
        rhs -= spectral_mul(pc, it->second);
      }
      for (const auto& [pe, pc] : fam.alpha[tl].terms) {
        if (total_degree(pe) == 0) continue;
        std::vector<int> qe(e.size());
        bool ok = true;
        for (size_t i = 0; i < e.size(); ++i) {
          qe[i] = e[i] - pe[i];
          if (qe[i] < 0) ok = false;
        }
        if (!ok) continue;
        auto it = phi_poly.terms.find(qe);
        if (it == phi_poly.terms.end()) continue;
        rhs += spectral_mul(it->second, pc);
      }

      Matrix mode0 = Matrix::Zero(r, c);
      if (a < static_cast<int>(phi_mode0.size())) {
        auto it = phi_mode0[a].terms.find(e);
        if (it != phi_mode0[a].terms.end()) mode0 = it->second;
      }

      SpectralField coeff(geom, r, c);
      if (diagonal_solve) {
        obstruction = std::max(obstruction, sup_abs(rhs.mean()));
        for (int rr = 0; rr < r; ++rr)
          for (int cc = 0; cc < c; ++cc)
            for (int m1 = -geom.band(); m1 <= geom.band(); ++m1)
              for (int m2 = -geom.band(); m2 <= geom.band(); ++m2) {
                if (m1 == 0 && m2 == 0) {
                  coeff.coef(rr, cc, 0, 0) = mode0(rr, cc);
                } else {
                  coeff.coef(rr, cc, m1, m2) =
                      rhs.coef(rr, cc, m1, m2) / geom.lambda_zbar(m1, m2);
                }
              }
      } else {
        // Pin the zero mode to the prescription and solve least squares over
        // the remaining modes; the residual is the lifting obstruction.
        SpectralField pinned = SpectralField::constant(geom, mode0);
        SpectralField lp = pinned.dzbar();
        lp += spectral_mul(alpha0[hd], pinned);
        lp -= spectral_mul(pinned, alpha0[tl]);
        Vector rhs_red = rhs.flatten() - lp.flatten();
        Vector sol_red = dense_solver.solve(rhs_red);
        Vector sol = Vector::Zero(dim);
        for (size_t jj = 0; jj < free_cols.size(); ++jj)
          sol[free_cols[jj]] = sol_red[jj];
        coeff = SpectralField::unflatten(geom, r, c, sol);
        SpectralField check = coeff.dzbar();
        check += spectral_mul(alpha0[hd], coeff);
        check -= spectral_mul(coeff, alpha0[tl]);
        check -= SpectralField::unflatten(geom, r, c, rhs_red);
        obstruction = std::max(obstruction, check.sup_abs());
        coeff += pinned;
      }
      bool nonzero = coeff.coef_norm() > 0.0;
      if (nonzero || total_degree(e) == 0) phi_poly.add_term(e, coeff);
    }
    fam.phi.push_back(std::move(phi_poly));
  }
  if (report) report->obstruction = obstruction;
  return fam;
}

SpectralField torus_evaluate_relation(const TorusGeometry& geom, const Quiver& q,
                                      const TorusBundle& bundle,
                                      const Relation& r) {
  r.validate(q);
  int dh = bundle.ranks[r.head(q)], dt = bundle.ranks[r.tail(q)];
  SpectralField acc(geom, dh, dt);
  for (const auto& term : r.terms) {
    if (term.path.is_trivial()) {
      acc += term.coeff * SpectralField::constant(
                              geom, Matrix::Identity(dh, dt).eval());
      continue;
    }
    GridField prod;
    bool first = true;
    for (int a : term.path.arrows()) {
      GridField g = bundle.phi[a].to_grid();
      prod = first ? g : prod.matmul(g);
      first = false;
    }
    acc += term.coeff * SpectralField::from_grid(geom, prod);
  }
  return acc;
}

double torus_relation_residual(const TorusGeometry& geom, const Quiver& q,
                               const TorusBundle& bundle,
                               const RelationSet& rels) {
  double worst = 0.0;
  for (const auto& r : rels)
    worst =
        std::max(worst, torus_evaluate_relation(geom, q, bundle, r).sup_abs());
  return worst;
}

}  // namespace qmod
