#include "qmod/quiver.hpp"

namespace qmod {

int Quiver::add_vertex(const std::string& id, int weight) {
  if (vertex_by_id_.count(id))
    throw QuiverError("duplicate vertex id: " + id);
  if (weight <= 0)
    throw QuiverError("vertex weight must be positive: " + id);
  int idx = num_vertices();
  vertices_.push_back({id, weight});
  vertex_by_id_[id] = idx;
  into_.emplace_back();
  out_.emplace_back();
  return idx;
}

int Quiver::add_arrow(const std::string& id, const std::string& tail,
                      const std::string& head) {
  if (arrow_by_id_.count(id))
    throw QuiverError("duplicate arrow id: " + id);
  auto t = vertex_by_id_.find(tail);
  auto h = vertex_by_id_.find(head);
  if (t == vertex_by_id_.end())
    throw QuiverError("arrow " + id + " has undeclared tail " + tail);
  if (h == vertex_by_id_.end())
    throw QuiverError("arrow " + id + " has undeclared head " + head);
  int idx = num_arrows();
  arrows_.push_back({id, t->second, h->second});
  arrow_by_id_[id] = idx;
  out_[t->second].push_back(idx);
  into_[h->second].push_back(idx);
  return idx;
}

int Quiver::vertex_index(const std::string& id) const {
  auto it = vertex_by_id_.find(id);
  if (it == vertex_by_id_.end()) throw QuiverError("unknown vertex: " + id);
  return it->second;
}

int Quiver::arrow_index(const std::string& id) const {
  auto it = arrow_by_id_.find(id);
  if (it == arrow_by_id_.end()) throw QuiverError("unknown arrow: " + id);
  return it->second;
}

Path Path::trivial(int vertex) {
  Path p;
  p.trivial_vertex_ = vertex;
  return p;
}

Path Path::of_arrows(const Quiver& q, std::vector<int> arrows) {
  if (arrows.empty()) throw QuiverError("empty arrow list; use Path::trivial");
  Path p;
  for (size_t i = 1; i < arrows.size(); ++i) {
    if (q.tail(arrows[i - 1]) != q.head(arrows[i]))
      throw QuiverError("path is not composable at position " +
                        std::to_string(i));
  }
  p.arrows_ = std::move(arrows);
  return p;
}

int Path::head(const Quiver& q) const {
  return is_trivial() ? trivial_vertex_ : q.head(arrows_.front());
}

int Path::tail(const Quiver& q) const {
  return is_trivial() ? trivial_vertex_ : q.tail(arrows_.back());
}

Path Path::compose(const Quiver& q, const Path& rhs) const {
  if (tail(q) != rhs.head(q))
    throw QuiverError("paths do not compose: tail/head mismatch");
  if (is_trivial()) return rhs;
  if (rhs.is_trivial()) return *this;
  std::vector<int> joined = arrows_;
  joined.insert(joined.end(), rhs.arrows_.begin(), rhs.arrows_.end());
  return Path::of_arrows(q, std::move(joined));
}

void Relation::validate(const Quiver& q) const {
  if (terms.empty()) throw QuiverError("relation has no terms");
  int h = terms.front().path.head(q);
  int t = terms.front().path.tail(q);
  for (const auto& term : terms) {
    if (std::abs(term.coeff) == 0.0)
      throw QuiverError("relation has a zero coefficient");
    if (term.path.head(q) != h || term.path.tail(q) != t)
      throw QuiverError("relation terms disagree on endpoints");
  }
}

}  // namespace qmod
