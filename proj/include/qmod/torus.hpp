#pragma once

#include <memory>

#include "qmod/types.hpp"

namespace qmod {

/// Flat torus X = C / (Z + tau Z) with constant Kaehler form of total area A,
/// band limit N, and a quadrature grid fine enough that products of two
/// band-limited fields integrate exactly.
class TorusGeometry {
 public:
  TorusGeometry(cx modulus, double area, int band);

  cx modulus() const { return tau_; }
  double area() const { return area_; }
  int band() const { return N_; }
  int modes() const { return 2 * N_ + 1; }
  int grid() const { return M_; }

  double g_metric() const { return g11_; }        // g_{1 1bar}
  double g_inverse() const { return ginv_; }      // g^{1bar 1}

  // d/dz and d/dzbar eigenvalues on the Fourier mode (m1, m2).
  cx lambda_z(int m1, int m2) const;
  cx lambda_zbar(int m1, int m2) const;

  const Matrix& dz_multiplier() const { return dz_mult_; }
  const Matrix& dzbar_multiplier() const { return dzbar_mult_; }

  // Evaluation matrices between mode space and the quadrature grid.
  const Matrix& eval_matrix() const { return eval_; }        // M x (2N+1)
  const Matrix& project_matrix() const { return project_; }  // (2N+1) x M

 private:
  cx tau_;
  double area_;
  int N_, M_;
  double g11_, ginv_;
  Matrix dz_mult_, dzbar_mult_;
  Matrix eval_, project_;
};

class GridField;

/// Band-limited matrix-valued function on the torus, stored as one
/// (2N+1) x (2N+1) Fourier coefficient block per matrix entry.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(const TorusGeometry& geom, int rows, int cols);
  static SpectralField constant(const TorusGeometry& geom, const Matrix& value);
  static SpectralField mode(const TorusGeometry& geom, int rows, int cols,
                            int r, int c, int m1, int m2, cx amplitude);

  bool empty() const { return entries_.empty(); }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const TorusGeometry& geom() const { return *geom_; }

  cx& coef(int r, int c, int m1, int m2);
  cx coef(int r, int c, int m1, int m2) const;
  Matrix mean() const;  // zero mode

  SpectralField dz() const;
  SpectralField dzbar() const;
  /// Pointwise conjugate transpose (exact in mode space).
  SpectralField dagger() const;

  GridField to_grid() const;
  static SpectralField from_grid(const TorusGeometry& geom, const GridField& g);

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(cx s);
  friend SpectralField operator+(SpectralField a, const SpectralField& b) {
    a += b;
    return a;
  }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) {
    a -= b;
    return a;
  }
  friend SpectralField operator*(cx s, SpectralField a) {
    a *= s;
    return a;
  }

  double sup_abs() const;        // max modulus over the quadrature grid
  double coef_norm() const;      // Frobenius norm of all coefficients
  double tail_fraction() const;  // top-band coefficient energy fraction

  /// Flat views for stencil differentiation.
  Vector flatten() const;
  static SpectralField unflatten(const TorusGeometry& geom, int rows, int cols,
                                 const Vector& v);

 private:
  const TorusGeometry* geom_ = nullptr;
  int rows_ = 0, cols_ = 0;
  std::vector<Matrix> entries_;  // rows*cols blocks of (2N+1)^2 coefficients
};

/// Values of a matrix field on the M x M quadrature grid, one M x M block per
/// matrix entry. Products and pointwise matrix functions live here.
class GridField {
 public:
  GridField() = default;
  GridField(const TorusGeometry& geom, int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const TorusGeometry& geom() const { return *geom_; }
  Matrix& entry(int r, int c) { return entries_[r * cols_ + c]; }
  const Matrix& entry(int r, int c) const { return entries_[r * cols_ + c]; }

  GridField matmul(const GridField& o) const;
  GridField dagger() const;
  GridField inverse() const;        // pointwise inverse (square)
  GridField herm_sqrt() const;      // pointwise, Hermitian positive input
  GridField herm_inv_sqrt() const;
  GridField herm_exp() const;
  GridField herm_log() const;
  GridField hermitize() const;      // (x + x^dagger)/2

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(cx s);
  friend GridField operator+(GridField a, const GridField& b) {
    a += b;
    return a;
  }
  friend GridField operator-(GridField a, const GridField& b) {
    a -= b;
    return a;
  }
  friend GridField operator*(cx s, GridField a) {
    a *= s;
    return a;
  }

  Matrix trace() const;            // pointwise trace as an M x M scalar grid
  cx integral_scalar() const;      // A * grid mean, for 1x1 fields
  double sup_abs() const;
  double min_herm_eigenvalue() const;

 private:
  const TorusGeometry* geom_ = nullptr;
  int rows_ = 0, cols_ = 0;
  std::vector<Matrix> entries_;  // M x M value blocks
};

/// Product computed on the grid and truncated back to the band.
SpectralField spectral_mul(const SpectralField& a, const SpectralField& b);
/// Metric adjoint field psi* = h_tail^{-1} psi^dagger h_head.
GridField grid_metric_adjoint(const GridField& psi, const GridField& h_tail_inv,
                              const GridField& h_head);

}  // namespace qmod
