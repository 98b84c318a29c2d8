#pragma once

#include "qmod/quiver.hpp"

namespace qmod {

/// Linear representation of a quiver: dimension d_lambda per vertex and a
/// complex d_{ha} x d_{ta} matrix per arrow. Vertices may carry dimension
/// zero, but then no incident arrow may carry a nonzero-size map.
struct Representation {
  std::vector<int> dims;           // per vertex
  std::vector<Matrix> maps;        // per arrow, shape d_{ha} x d_{ta}

  void validate(const Quiver& q) const;
  int dim(int v) const { return dims.at(v); }
};

/// phi(p) = phi_{a0} ... phi_{am}; the trivial path evaluates to the
/// identity on its vertex space.
Matrix evaluate_path(const Quiver& q, const Representation& rep, const Path& p);

/// Sum_j c_j phi(p_j) for a relation with common endpoints.
Matrix evaluate_relation(const Quiver& q, const Representation& rep,
                         const Relation& r);

double relation_residual(const Quiver& q, const Representation& rep,
                         const RelationSet& relations);

bool satisfies_relations(const Quiver& q, const Representation& rep,
                         const RelationSet& relations, double tol = kDefaultTol);

}  // namespace qmod
