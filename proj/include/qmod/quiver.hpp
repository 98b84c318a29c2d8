#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qmod/types.hpp"

namespace qmod {

struct QuiverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite quiver: vertices carry a positive integer weight (the multiplicity
/// n_lambda of the vertex), arrows carry tail/head vertex indices.
class Quiver {
 public:
  struct Vertex {
    std::string id;
    int weight = 1;
  };
  struct Arrow {
    std::string id;
    int tail = -1;
    int head = -1;
  };

  Quiver() = default;

  int add_vertex(const std::string& id, int weight = 1);
  int add_arrow(const std::string& id, const std::string& tail,
                const std::string& head);

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_arrows() const { return static_cast<int>(arrows_.size()); }

  const Vertex& vertex(int v) const { return vertices_.at(v); }
  const Arrow& arrow(int a) const { return arrows_.at(a); }
  int tail(int a) const { return arrows_.at(a).tail; }
  int head(int a) const { return arrows_.at(a).head; }
  double weight(int v) const { return static_cast<double>(vertices_.at(v).weight); }

  int vertex_index(const std::string& id) const;
  int arrow_index(const std::string& id) const;

  /// Arrows with head at v (h^{-1}(v)) and tail at v (t^{-1}(v)).
  const std::vector<int>& arrows_into(int v) const { return into_.at(v); }
  const std::vector<int>& arrows_out_of(int v) const { return out_.at(v); }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Arrow> arrows_;
  std::map<std::string, int> vertex_by_id_;
  std::map<std::string, int> arrow_by_id_;
  std::vector<std::vector<int>> into_;
  std::vector<std::vector<int>> out_;
};

/// Composable arrow sequence [a0, ..., am] with t(a_{i-1}) = h(a_i), or the
/// trivial path e_v at a vertex. Composition applies the rightmost arrow
/// first, so the induced map is phi_{a0} . phi_{a1} ... phi_{am}.
class Path {
 public:
  static Path trivial(int vertex);
  static Path of_arrows(const Quiver& q, std::vector<int> arrows);

  bool is_trivial() const { return arrows_.empty(); }
  int length() const { return static_cast<int>(arrows_.size()); }
  const std::vector<int>& arrows() const { return arrows_; }
  int head(const Quiver& q) const;
  int tail(const Quiver& q) const;

  /// Concatenation p*q (p applied after q); requires tail(p) == head(q).
  Path compose(const Quiver& q, const Path& rhs) const;

 private:
  std::vector<int> arrows_;
  int trivial_vertex_ = -1;
};

struct RelationTerm {
  cx coeff;
  Path path;
};

/// Complex linear combination of paths with a common tail and a common head.
struct Relation {
  std::vector<RelationTerm> terms;
  void validate(const Quiver& q) const;
  int head(const Quiver& q) const { return terms.at(0).path.head(q); }
  int tail(const Quiver& q) const { return terms.at(0).path.tail(q); }
};

using RelationSet = std::vector<Relation>;

}  // namespace qmod
