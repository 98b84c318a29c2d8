#pragma once

#include <functional>

#include "qmod/types.hpp"

namespace qmod {

/// Wirtinger finite differences for maps s in C^k -> values supporting +, -,
/// and scalar multiplication. Centered second-order stencils with one level
/// of Richardson extrapolation.
template <class T>
class Wirtinger {
 public:
  using Fn = std::function<T(const Vector&)>;

  Wirtinger(int k, double step, Fn fn) : k_(k), step_(step), fn_(std::move(fn)) {}

  T d_holo(int dir, const Vector& at) const { return richardson(dir, at, false); }
  T d_anti(int dir, const Vector& at) const { return richardson(dir, at, true); }

  /// Estimated truncation error of the Richardson value for d_holo, from the
  /// disagreement of the two step sizes.
  double richardson_disagreement(int dir, const Vector& at,
                                 const std::function<double(const T&)>& norm) const {
    T d1 = centered(dir, at, false, step_);
    T d2 = centered(dir, at, false, 2.0 * step_);
    return norm(d1 - d2) / 3.0;
  }

 private:
  T centered(int dir, const Vector& at, bool anti, double eps) const {
    auto shift = [&](Vector base, cx delta) {
      base[dir] += delta;
      return base;
    };
    T fx_p = fn_(shift(at, cx(eps, 0)));
    T fx_m = fn_(shift(at, cx(-eps, 0)));
    T fy_p = fn_(shift(at, cx(0, eps)));
    T fy_m = fn_(shift(at, cx(0, -eps)));
    T dx = (1.0 / (2.0 * eps)) * (fx_p - fx_m);
    T dy = (1.0 / (2.0 * eps)) * (fy_p - fy_m);
    // d/ds = (d/dx - i d/dy)/2, d/dsbar = (d/dx + i d/dy)/2.
    cx iy = anti ? cx(0, 0.5) : cx(0, -0.5);
    return cx(0.5) * dx + iy * dy;
  }

  T richardson(int dir, const Vector& at, bool anti) const {
    T d1 = centered(dir, at, anti, step_);
    T d2 = centered(dir, at, anti, 2.0 * step_);
    return (1.0 / 3.0) * (4.0 * d1 - d2);
  }

  int k_;
  double step_;
  Fn fn_;
};

/// Lexicographic key for caching solver results on stencil lattices. Offsets
/// are exact small combinations of the step, so bitwise comparison is stable.
struct OffsetKey {
  std::vector<double> re_im;
  explicit OffsetKey(const Vector& v) {
    re_im.reserve(2 * v.size());
    for (int i = 0; i < v.size(); ++i) {
      re_im.push_back(v[i].real() + 0.0);  // normalize -0.0
      re_im.push_back(v[i].imag() + 0.0);
    }
  }
  bool operator<(const OffsetKey& o) const { return re_im < o.re_im; }
};

}  // namespace qmod
