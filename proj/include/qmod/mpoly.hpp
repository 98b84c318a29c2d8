#pragma once

#include <map>
#include <vector>

#include "qmod/types.hpp"

namespace qmod {

/// Multivariate polynomial in k complex variables with coefficients in T
/// (matrices or fields). Exponent vectors have fixed length k. Holomorphic by
/// construction: there are no conjugated variables.
template <class T>
struct MPoly {
  int k = 0;
  std::map<std::vector<int>, T> terms;

  static MPoly constant(int k, T value) {
    MPoly p;
    p.k = k;
    p.terms.emplace(std::vector<int>(k, 0), std::move(value));
    return p;
  }

  void add_term(const std::vector<int>& expo, const T& coeff) {
    auto it = terms.find(expo);
    if (it == terms.end())
      terms.emplace(expo, coeff);
    else
      it->second = it->second + coeff;
  }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms) {
      int t = 0;
      for (int x : e) t += x;
      d = std::max(d, t);
    }
    return d;
  }

  template <class Zero>
  T eval(const Vector& s, Zero&& zero) const {
    T acc = zero();
    for (const auto& [e, c] : terms) {
      cx mono = 1.0;
      for (int i = 0; i < k; ++i)
        for (int p = 0; p < e[i]; ++p) mono *= s[i];
      acc = acc + mono * c;
    }
    return acc;
  }

  MPoly derivative(int dir) const {
    MPoly out;
    out.k = k;
    for (const auto& [e, c] : terms) {
      if (e[dir] == 0) continue;
      std::vector<int> e2 = e;
      e2[dir] -= 1;
      out.add_term(e2, cx(static_cast<double>(e[dir])) * c);
    }
    return out;
  }

  /// Substitute s^i = subs[i](t); subs are scalar polynomials in the new
  /// variables. Exact (no truncation).
  MPoly compose(const std::vector<MPoly<cx>>& subs) const {
    int kt = subs.empty() ? 0 : subs[0].k;
    MPoly out;
    out.k = kt;
    for (const auto& [e, c] : terms) {
      MPoly<cx> mono = MPoly<cx>::constant(kt, cx(1.0));
      for (int i = 0; i < k; ++i)
        for (int p = 0; p < e[i]; ++p) mono = mono * subs[i];
      for (const auto& [me, mc] : mono.terms) out.add_term(me, mc * c);
    }
    return out;
  }

  friend MPoly operator*(const MPoly& a, const MPoly& b) {
    MPoly out;
    out.k = a.k;
    for (const auto& [ea, ca] : a.terms)
      for (const auto& [eb, cb] : b.terms) {
        std::vector<int> e = ea;
        for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        out.add_term(e, ca * cb);
      }
    return out;
  }
};

/// Scalar polynomial helpers for reparameterizations s = s0 + A t + Q(t t).
std::vector<MPoly<cx>> affine_quadratic_substitution(
    const Vector& shift, const Matrix& linear,
    const std::vector<Matrix>& quadratic);

}  // namespace qmod
