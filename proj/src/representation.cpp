#include "qmod/representation.hpp"

namespace qmod {

void Representation::validate(const Quiver& q) const {
  if (static_cast<int>(dims.size()) != q.num_vertices())
    throw QuiverError("dims size does not match vertex count");
  if (static_cast<int>(maps.size()) != q.num_arrows())
    throw QuiverError("maps size does not match arrow count");
  for (int v = 0; v < q.num_vertices(); ++v)
    if (dims[v] < 0) throw QuiverError("negative dimension at " + q.vertex(v).id);
  for (int a = 0; a < q.num_arrows(); ++a) {
    int dh = dims[q.head(a)], dt = dims[q.tail(a)];
    if (dh == 0 || dt == 0)
      throw QuiverError("arrow " + q.arrow(a).id +
                        " touches a zero-dimensional vertex");
    if (maps[a].rows() != dh || maps[a].cols() != dt)
      throw QuiverError("map shape mismatch on arrow " + q.arrow(a).id);
  }
}

Matrix evaluate_path(const Quiver& q, const Representation& rep, const Path& p) {
  if (p.is_trivial()) {
    int d = rep.dim(p.head(q));
    if (d == 0) throw QuiverError("trivial path at a zero-dimensional vertex");
    return Matrix::Identity(d, d);
  }
  Matrix acc;
  bool first = true;
  // Stored order is [a0, ..., am]; the product phi_{a0}...phi_{am} applies
  // the rightmost factor first.
  for (int a : p.arrows()) {
    int dh = rep.dim(q.head(a)), dt = rep.dim(q.tail(a));
    if (dh == 0 || dt == 0)
      throw QuiverError("path passes through a zero-dimensional vertex");
    const Matrix& m = rep.maps.at(a);
    if (m.rows() != dh || m.cols() != dt)
      throw QuiverError("map shape mismatch along path");
    acc = first ? m : Matrix(acc * m);
    first = false;
  }
  return acc;
}

Matrix evaluate_relation(const Quiver& q, const Representation& rep,
                         const Relation& r) {
  r.validate(q);
  int dh = rep.dim(r.head(q)), dt = rep.dim(r.tail(q));
  Matrix acc = Matrix::Zero(dh, dt);
  for (const auto& term : r.terms)
    acc += term.coeff * evaluate_path(q, rep, term.path);
  return acc;
}

double relation_residual(const Quiver& q, const Representation& rep,
                         const RelationSet& relations) {
  double worst = 0.0;
  for (const auto& r : relations)
    worst = std::max(worst, sup_abs(evaluate_relation(q, rep, r)));
  return worst;
}

bool satisfies_relations(const Quiver& q, const Representation& rep,
                         const RelationSet& relations, double tol) {
  return relation_residual(q, rep, relations) <= tol;
}

}  // namespace qmod
