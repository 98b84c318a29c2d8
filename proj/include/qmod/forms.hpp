#pragma once

#include <map>

#include "qmod/torusbackend.hpp"

namespace qmod {

/// Differential form on X x S near the base point of a one-parameter family,
/// stored by split bidegree. Component masks combine bit 0 = dz, bit 1 =
/// dzbar, bit 2 = ds, bit 3 = dsbar; the stored field is the coefficient of
/// the wedge of the selected one-forms in that canonical order.
class FormOnProduct {
 public:
  FormOnProduct() = default;
  FormOnProduct(const TorusGeometry& geom, int rows, int cols)
      : geom_(&geom), rows_(rows), cols_(cols) {}

  static constexpr unsigned kDz = 1, kDzbar = 2, kDs = 4, kDsbar = 8;

  const TorusGeometry& geom() const { return *geom_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool has(unsigned mask) const { return comps_.count(mask) != 0; }
  const SpectralField& comp(unsigned mask) const;
  void set(unsigned mask, SpectralField f);
  void add(unsigned mask, const SpectralField& f);

  FormOnProduct wedge(const FormOnProduct& o) const;
  FormOnProduct traced() const;  // pointwise trace; 1 x 1 coefficients

  FormOnProduct& operator+=(const FormOnProduct& o);
  FormOnProduct& operator-=(const FormOnProduct& o);
  FormOnProduct& operator*=(cx s);
  friend FormOnProduct operator+(FormOnProduct a, const FormOnProduct& b) {
    a += b;
    return a;
  }
  friend FormOnProduct operator-(FormOnProduct a, const FormOnProduct& b) {
    a -= b;
    return a;
  }
  friend FormOnProduct operator*(cx s, FormOnProduct a) {
    a *= s;
    return a;
  }

  /// Pushforward along X: integrates the dz^dzbar part, leaving an S-form
  /// keyed by masks over {ds, dsbar}; scalar coefficients (1 x 1 input).
  std::map<unsigned, cx> fiber_integral() const;

  double max_component_norm() const;

 private:
  const TorusGeometry* geom_ = nullptr;
  int rows_ = 0, cols_ = 0;
  std::map<unsigned, SpectralField> comps_;
};

/// The constant Kaehler form of the torus as a form on the product.
FormOnProduct kaehler_form(const TorusGeometry& geom);

/// Full curvature form of (dbar + alpha(s), h(s)) at the center of a
/// one-parameter family, with the mixed and base-base components from
/// Richardson stencils of the solved metrics.
FormOnProduct curvature_on_product(TorusFamilyBackend& backend, int vertex);

/// Truncated Chern character form (degrees 0, 2, 4): r + c1-term + ch2-term.
/// Power convention: ch = r + (i/2pi) tr W + (i/2pi)^2 tr(W ^ W) / 2.
FormOnProduct chern_character(const FormOnProduct& curvature, int rank);

/// Chern character of a virtual metrized bundle, truncated at degree 4, with
/// the ring operations used for the determinant-bundle identities.
struct VirtualCh {
  FormOnProduct ch;  // 1 x 1 coefficients, even degrees
  VirtualCh operator+(const VirtualCh& o) const;
  VirtualCh operator-(const VirtualCh& o) const;
  VirtualCh operator*(const VirtualCh& o) const;  // tensor product
  VirtualCh tensor_power(int m) const;
};

VirtualCh virtual_unit(const TorusGeometry& geom);            // ch(O) = 1
VirtualCh virtual_constant(const TorusGeometry& geom, cx c);  // c * ch(O)
VirtualCh virtual_polarization(const TorusGeometry& geom);    // ch(L) = 1 + w_X
VirtualCh virtual_bundle(const FormOnProduct& curvature, int rank);

struct FiberIntegralReport {
  cx g_eqwp = 0;      // metric coefficient from the harmonic inner products
  cx g_fb1 = 0;       // from the three-term fiber integral formula
  cx g_fb2 = 0;       // from the Chern character version
  cx term_curv2 = 0;  // (1/2) sum n tr(W ^ W) contribution
  cx term_tau = 0;    // tau'-weighted first Chern contribution
  cx term_potential = 0;
  double gap_fb1_eqwp = 0;
  double gap_fb1_fb2 = 0;
  double potential_residual = 0;  // term3 against the e^{-chi} curvature route
};

FiberIntegralReport wp_via_fiber_integral(TorusFamilyBackend& backend);

struct VirtualChReport {
  double end_identity = 0;       // ch(End E - O^{r^2}): degree-4 term
  double det_square_identity = 0;
  double twist_c1_identity = 0;  // (det E (det E0)^-1 - O) x (L - O)
  double twist_square_identity = 0;
  double x0_invariance = 0;
  double scale = 0;
};

VirtualChReport virtual_ch_checks(TorusFamilyBackend& backend, int vertex);

}  // namespace qmod
