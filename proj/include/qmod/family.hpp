#pragma once

#include "qmod/flow.hpp"
#include "qmod/mpoly.hpp"

namespace qmod {

/// Holomorphic polynomial family of representations over a polydisc: one
/// matrix-coefficient polynomial per arrow in the offset variable u = s - s0.
/// The base point is carried for reporting; all evaluation is in offsets.
struct FamilySpec {
  int params = 0;
  Vector base;                          // s0 in C^k, metadata only
  double stencil_step = 1e-3;
  std::vector<int> dims;                // per vertex, constant in s
  std::vector<MPoly<Matrix>> arrows;    // per arrow, in the offset variable

  Representation at(const Vector& offset) const;
  Representation derivative_at(int dir, const Vector& offset) const;

  /// Relations must hold identically in s; checked on a small stencil.
  double relation_residual_on_stencil(const Quiver& q, const RelationSet& rels) const;

  /// Exact composition with s = base + A t + (1/2) q_{kl} t^k t^l (the new
  /// family is again polynomial, based at t = 0).
  FamilySpec reparameterized(const Matrix& linear,
                             const std::vector<Matrix>& quadratic) const;
};

}  // namespace qmod
