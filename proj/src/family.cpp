#include "qmod/family.hpp"

namespace qmod {

std::vector<MPoly<cx>> affine_quadratic_substitution(
    const Vector& shift, const Matrix& linear,
    const std::vector<Matrix>& quadratic) {
  int kt = static_cast<int>(linear.cols());
  int ks = static_cast<int>(linear.rows());
  std::vector<MPoly<cx>> subs(ks);
  for (int p = 0; p < ks; ++p) {
    MPoly<cx>& sp = subs[p];
    sp.k = kt;
    sp.add_term(std::vector<int>(kt, 0), shift[p]);
    for (int i = 0; i < kt; ++i) {
      std::vector<int> e(kt, 0);
      e[i] = 1;
      sp.add_term(e, linear(p, i));
    }
    if (!quadratic.empty()) {
      for (int i = 0; i < kt; ++i)
        for (int j = 0; j < kt; ++j) {
          if (quadratic[p](i, j) == cx(0.0)) continue;
          std::vector<int> e(kt, 0);
          e[i] += 1;
          e[j] += 1;
          sp.add_term(e, 0.5 * quadratic[p](i, j));
        }
    }
  }
  return subs;
}

Representation FamilySpec::at(const Vector& offset) const {
  Representation rep;
  rep.dims = dims;
  rep.maps.reserve(arrows.size());
  for (const auto& poly : arrows) {
    const Matrix& any = poly.terms.begin()->second;
    rep.maps.push_back(poly.eval(
        offset, [&] { return Matrix::Zero(any.rows(), any.cols()).eval(); }));
  }
  return rep;
}

Representation FamilySpec::derivative_at(int dir, const Vector& offset) const {
  Representation rep;
  rep.dims = dims;
  for (const auto& poly : arrows) {
    const Matrix& any = poly.terms.begin()->second;
    MPoly<Matrix> d = poly.derivative(dir);
    auto zero = [&] { return Matrix::Zero(any.rows(), any.cols()).eval(); };
    rep.maps.push_back(d.terms.empty() ? zero() : d.eval(offset, zero));
  }
  return rep;
}

double FamilySpec::relation_residual_on_stencil(const Quiver& q,
                                                const RelationSet& rels) const {
  double worst = 0.0;
  std::vector<Vector> points;
  points.push_back(Vector::Zero(params));
  for (int i = 0; i < params; ++i) {
    for (cx delta : {cx(stencil_step, 0), cx(-stencil_step, 0),
                     cx(0, stencil_step), cx(0, -stencil_step)}) {
      Vector v = Vector::Zero(params);
      v[i] = delta;
      points.push_back(v);
    }
  }
  for (const auto& p : points)
    worst = std::max(worst, relation_residual(q, at(p), rels));
  return worst;
}

FamilySpec FamilySpec::reparameterized(
    const Matrix& linear, const std::vector<Matrix>& quadratic) const {
  FamilySpec out;
  out.params = static_cast<int>(linear.cols());
  out.base = base;
  out.stencil_step = stencil_step;
  out.dims = dims;
  auto subs = affine_quadratic_substitution(Vector::Zero(params), linear, quadratic);
  out.arrows.reserve(arrows.size());
  for (const auto& poly : arrows) out.arrows.push_back(poly.compose(subs));
  return out;
}

}  // namespace qmod
