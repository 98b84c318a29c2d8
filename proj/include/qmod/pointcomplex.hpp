#pragma once

#include "qmod/metrics.hpp"

namespace qmod {

/// Vertex-indexed End-valued blocks (level-0 cochains).
using VertexBlocks = std::vector<Matrix>;
/// Arrow-indexed Hom-valued blocks (level-1 cochains in the absolute case;
/// the vertex form component is identically zero on a point).
using ArrowBlocks = std::vector<Matrix>;

/// Deformation complex of a quiver representation over a point, with the
/// metric inner products of a solved (or candidate) vortex metric. Level-2
/// is the zero space here, so d1 = 0 and the level-1 Laplacian is d0 d0*.
class PointComplex {
 public:
  PointComplex(const Quiver& q, Representation rep, MetricAssignment metrics,
               RelationSet relations, double kernel_tol = 1e-8);

  const Quiver& quiver() const { return *q_; }
  const Representation& rep() const { return rep_; }
  const MetricAssignment& metrics() const { return metrics_; }
  const RelationSet& relations() const { return relations_; }

  int dim_c0() const { return dim_c0_; }
  int dim_c1_full() const { return dim_c1_full_; }
  int dim_a1() const { return static_cast<int>(a1_basis_.cols()); }

  // Weighted commutator Delta(xi)_a = xi_{ha} phi_a / sqrt(n_{ha})
  //                                 - phi_a xi_{ta} / sqrt(n_{ta}).
  ArrowBlocks delta(const VertexBlocks& xi) const;
  // Closed-form adjoint: (1/sqrt(n_v)) (sum_{h(a)=v} psi_a phi_a*
  //                                   - sum_{t(a)=v} phi_a* psi_a).
  VertexBlocks delta_adjoint(const ArrowBlocks& psi) const;

  /// First-order Leibniz expansion of a relation along psi.
  Matrix linearize_relation(const Relation& r, const ArrowBlocks& psi) const;
  double linearized_relation_residual(const ArrowBlocks& psi) const;
  /// Metric-orthogonal projection onto A1 = ker of the linearized relations.
  ArrowBlocks project_to_a1(const ArrowBlocks& psi) const;

  VertexBlocks laplacian0(const VertexBlocks& xi) const;  // d0* d0
  /// Closed form of the level-0 Laplacian (phi-sandwich terms), kept separate
  /// from the composed operators so the two can be cross-checked.
  VertexBlocks laplacian0_closed_form(const VertexBlocks& xi) const;
  ArrowBlocks hodge1(const ArrowBlocks& psi) const;  // d0 d0* within A1

  // Metric inner products and norms.
  cx inner0(const VertexBlocks& x, const VertexBlocks& y) const;
  cx inner1(const ArrowBlocks& x, const ArrowBlocks& y) const;
  double norm0(const VertexBlocks& x) const;
  double norm1(const ArrowBlocks& x) const;

  /// Hermitian pairing (u v v*)_v = (1/sqrt(n_v)) (sum_{h(a)=v} u_a v_a*
  ///   - sum_{t(a)=v} v_a* u_a); the form commutator term is absent here.
  VertexBlocks vee(const ArrowBlocks& u, const ArrowBlocks& v) const;

  // Hodge theory. Level selects the Laplacian: 0 for d0* d0 on C0, 1 for
  // d0 d0* on A1. Green's operator is the pseudoinverse vanishing on the
  // numerical kernel.
  VertexBlocks harmonic_projection0(const VertexBlocks& x) const;
  VertexBlocks greens0(const VertexBlocks& x) const;
  ArrowBlocks harmonic_projection1(const ArrowBlocks& x) const;
  ArrowBlocks greens1(const ArrowBlocks& x) const;
  bool greens_gap_warning(int level) const;

  struct HyperDims {
    int h0 = 0, h1 = 0, h2 = 0;
    int dim_b0 = 0, dim_a1 = 0;
  };
  HyperDims hyperdims() const;

  // Dense operators in orthonormal coordinates (for inspection and for the
  // brute-force adjoint cross-check): d0 maps C0 coordinates to A1
  // coordinates.
  const Matrix& d0_matrix() const { return d0_a1_; }
  Matrix hodge0_matrix() const { return d0_a1_.adjoint() * d0_a1_; }
  Matrix hodge1_matrix() const { return d0_a1_ * d0_a1_.adjoint(); }

  // Coordinate helpers (metric-orthonormal coordinates).
  Vector to_coords0(const VertexBlocks& x) const;
  VertexBlocks from_coords0(const Vector& v) const;
  Vector to_coords1(const ArrowBlocks& x) const;   // full C1 coordinates
  ArrowBlocks from_coords1(const Vector& v) const;
  Vector to_a1_coords(const ArrowBlocks& x) const;
  ArrowBlocks from_a1_coords(const Vector& v) const;

  VertexBlocks zero0() const;
  ArrowBlocks zero1() const;

 private:
  void build_bases(double kernel_tol);
  void build_spectra();

  const Quiver* q_;
  Representation rep_;
  MetricAssignment metrics_;
  RelationSet relations_;
  double kernel_tol_;

  std::vector<Matrix> sqrt_h_, inv_sqrt_h_;  // per vertex
  std::vector<Matrix> adj_;                  // metric adjoints phi_a*
  std::vector<int> off_c0_, off_c1_;
  int dim_c0_ = 0, dim_c1_full_ = 0;

  Matrix a1_basis_;   // dim_c1_full x dim_a1, orthonormal columns
  Matrix d0_full_;    // dim_c1_full x dim_c0
  Matrix d0_a1_;      // dim_a1 x dim_c0

  // Eigendecompositions of the two Laplacians.
  Eigen::VectorXd evals0_, evals1_;
  Matrix evecs0_, evecs1_;
  double kernel_cut0_ = 0.0, kernel_cut1_ = 0.0;
  bool gap_warning0_ = false, gap_warning1_ = false;
};

}  // namespace qmod
