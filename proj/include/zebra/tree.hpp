#pragma once

// Address arithmetic for depth-truncated rooted Cayley trees and the
// even-level tree built from consecutive edge pairs.
//
// The tree is never materialized as an object graph. A vertex is the sequence
// of child indices leading to it from the root; an edge is named by its lower
// endpoint. Configurations over a truncation store one state per edge in
// lexicographic address order, which is the depth-first preorder:
//
//   0, 0/0, 0/0/0, ..., 0/1, ..., 1, 1/0, ...

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zebra/error.hpp"
#include "zebra/params.hpp"

namespace zebra {

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const char* what) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) throw Overflow(what);
  return a * b;
}

inline std::uint64_t checked_add(std::uint64_t a, std::uint64_t b, const char* what) {
  if (b > std::numeric_limits<std::uint64_t>::max() - a) throw Overflow(what);
  return a + b;
}

}  // namespace detail

// |W_n|: number of vertices at distance n from the root.
inline std::uint64_t level_size(const TreeParams& params, std::uint32_t n) {
  if (n == 0) return 1;
  std::uint64_t size = params.root_degree();
  for (std::uint32_t i = 1; i < n; ++i) {
    size = detail::checked_mul(size, params.k(), "level_size overflows 64 bits");
  }
  return size;
}

class VertexAddress {
 public:
  VertexAddress() = default;
  explicit VertexAddress(std::vector<std::uint32_t> path) : path_(std::move(path)) {}
  VertexAddress(std::initializer_list<std::uint32_t> path) : path_(path) {}

  static VertexAddress root() { return {}; }

  std::uint32_t level() const noexcept { return static_cast<std::uint32_t>(path_.size()); }
  bool is_root() const noexcept { return path_.empty(); }
  std::span<const std::uint32_t> indices() const noexcept { return path_; }
  std::uint32_t operator[](std::size_t i) const { return path_[i]; }

  VertexAddress child(std::uint32_t index) const {
    VertexAddress out = *this;
    out.path_.push_back(index);
    return out;
  }

  VertexAddress parent() const {
    if (is_root()) throw InvalidArgument("the root has no parent");
    return VertexAddress(std::vector<std::uint32_t>(path_.begin(), path_.end() - 1));
  }

  bool is_prefix_of(const VertexAddress& other) const {
    return path_.size() <= other.path_.size() &&
           std::equal(path_.begin(), path_.end(), other.path_.begin());
  }

  // Slash-separated indices; the root is the empty string.
  std::string to_string() const {
    std::string out;
    for (std::size_t i = 0; i < path_.size(); ++i) {
      if (i) out += '/';
      out += std::to_string(path_[i]);
    }
    return out;
  }

  static VertexAddress parse(std::string_view text) {
    std::vector<std::uint32_t> path;
    if (text.empty()) return VertexAddress(std::move(path));
    std::size_t pos = 0;
    while (true) {
      std::size_t end = text.find('/', pos);
      std::string_view part = text.substr(pos, end == std::string_view::npos ? text.npos : end - pos);
      std::uint32_t index = 0;
      auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), index);
      if (part.empty() || ec != std::errc{} || ptr != part.data() + part.size()) {
        throw ParseError("bad vertex address '" + std::string(text) + "'");
      }
      path.push_back(index);
      if (end == std::string_view::npos) break;
      pos = end + 1;
    }
    return VertexAddress(std::move(path));
  }

  friend auto operator<=>(const VertexAddress&, const VertexAddress&) = default;
  friend bool operator==(const VertexAddress&, const VertexAddress&) = default;

 private:
  std::vector<std::uint32_t> path_;
};

// True when every index respects its arity bound under `params`.
inline bool is_valid_address(const TreeParams& params, const VertexAddress& v) {
  for (std::uint32_t i = 0; i < v.level(); ++i) {
    std::uint32_t arity = i == 0 ? params.root_degree() : params.k();
    if (v[i] >= arity) return false;
  }
  return true;
}

// S(x): the direct successors of v.
inline std::vector<VertexAddress> children(const TreeParams& params, const VertexAddress& v) {
  std::uint32_t d = v.is_root() ? params.root_degree() : params.k();
  std::vector<VertexAddress> out;
  out.reserve(d);
  for (std::uint32_t i = 0; i < d; ++i) out.push_back(v.child(i));
  return out;
}

struct EdgeId {
  VertexAddress lower;

  EdgeId() = default;
  explicit EdgeId(VertexAddress v) : lower(std::move(v)) {
    if (lower.is_root()) throw InvalidArgument("an edge is named by a non-root lower endpoint");
  }

  VertexAddress upper() const { return lower.parent(); }

  friend auto operator<=>(const EdgeId&, const EdgeId&) = default;
  friend bool operator==(const EdgeId&, const EdgeId&) = default;
};

enum class EdgeState : std::uint8_t { Closed = 0, Open = 1 };

inline EdgeState flip(EdgeState s) noexcept {
  return s == EdgeState::Open ? EdgeState::Closed : EdgeState::Open;
}

inline char to_char(EdgeState s) noexcept { return s == EdgeState::Open ? 'O' : 'C'; }

// Shape of a truncated tree whose root has `root_arity` children and every
// other vertex `arity` children, cut at `depth` levels. Provides the preorder
// edge numbering.
class TreeShape {
 public:
  TreeShape(std::uint64_t root_arity, std::uint64_t arity, std::uint32_t depth)
      : root_arity_(root_arity), arity_(arity), depth_(depth), block_(depth + 2, 0) {
    // block_[j]: edges in the block of one level-j edge (itself plus subtree).
    for (std::uint32_t j = depth; j >= 1; --j) {
      std::uint64_t below = j == depth ? 0 : detail::checked_mul(arity_, block_[j + 1], "tree shape overflows");
      block_[j] = detail::checked_add(below, 1, "tree shape overflows");
    }
    edge_count_ = depth == 0 ? 0 : detail::checked_mul(root_arity_, block_[1], "tree shape overflows");
  }

  std::uint64_t root_arity() const noexcept { return root_arity_; }
  std::uint64_t arity() const noexcept { return arity_; }
  std::uint32_t depth() const noexcept { return depth_; }
  std::uint64_t edge_count() const noexcept { return edge_count_; }

  std::uint64_t arity_at(std::uint32_t level) const noexcept { return level == 0 ? root_arity_ : arity_; }

  // Preorder index of the edge whose lower endpoint is `v`. Caller guarantees
  // 1 <= level <= depth and in-range indices.
  std::uint64_t edge_index(std::span<const std::uint32_t> path) const noexcept {
    std::uint64_t idx = path.size() - 1;
    for (std::size_t j = 0; j < path.size(); ++j) idx += path[j] * block_[j + 1];
    return idx;
  }

  // Preorder index of the edge to child `c` of a vertex at `level`, where
  // `parent_edge` is the index of the edge into that vertex (ignored at root).
  std::uint64_t child_edge(std::uint64_t parent_edge, std::uint32_t level, std::uint64_t c) const noexcept {
    return level == 0 ? c * block_[1] : parent_edge + 1 + c * block_[level + 1];
  }

  bool contains(std::span<const std::uint32_t> path) const noexcept {
    if (path.empty() || path.size() > depth_) return false;
    for (std::size_t j = 0; j < path.size(); ++j) {
      if (path[j] >= arity_at(static_cast<std::uint32_t>(j))) return false;
    }
    return true;
  }

  friend bool operator==(const TreeShape& a, const TreeShape& b) {
    return a.root_arity_ == b.root_arity_ && a.arity_ == b.arity_ && a.depth_ == b.depth_;
  }

 private:
  std::uint64_t root_arity_;
  std::uint64_t arity_;
  std::uint32_t depth_;
  std::vector<std::uint64_t> block_;
  std::uint64_t edge_count_ = 0;
};

inline TreeShape sigma_shape(const TreeParams& params, std::uint32_t depth) {
  return TreeShape(params.root_degree(), params.k(), depth);
}

// The even-level tree: order k^2, root order root_degree * k.
inline TreeShape hat_shape(const TreeParams& params, std::uint32_t hat_depth) {
  return TreeShape(std::uint64_t{params.root_degree()} * params.k(),
                   std::uint64_t{params.k()} * params.k(), hat_depth);
}

// Configurations larger than this are never materialized.
inline constexpr std::uint64_t kMaxMaterializedEdges = std::uint64_t{1} << 26;

namespace detail {

inline void collect_edges(const TreeShape& shape, std::vector<std::uint32_t>& path,
                          std::vector<EdgeId>& out) {
  std::uint32_t level = static_cast<std::uint32_t>(path.size());
  if (level == shape.depth()) return;
  for (std::uint32_t c = 0; c < shape.arity_at(level); ++c) {
    path.push_back(c);
    out.emplace_back(VertexAddress(path));
    collect_edges(shape, path, out);
    path.pop_back();
  }
}

inline void require_materializable(const TreeShape& shape) {
  if (shape.edge_count() > kMaxMaterializedEdges) {
    throw TooLarge("truncation has " + std::to_string(shape.edge_count()) +
                   " edges, above the materialization bound");
  }
}

}  // namespace detail

// All edges of a shape in preorder (= lexicographic address order).
inline std::vector<EdgeId> preorder_edges(const TreeShape& shape) {
  detail::require_materializable(shape);
  std::vector<EdgeId> out;
  out.reserve(shape.edge_count());
  std::vector<std::uint32_t> path;
  detail::collect_edges(shape, path, out);
  return out;
}

// σ restricted to the edges of the depth-truncated tree.
class SigmaConfig {
 public:
  SigmaConfig(const TreeParams& params, std::uint32_t depth, EdgeState fill = EdgeState::Closed)
      : params_(params), shape_(sigma_shape(params, depth)) {
    detail::require_materializable(shape_);
    states_.assign(shape_.edge_count(), fill);
  }

  // Edge i (preorder) is Open iff bit i of `bits` is set.
  static SigmaConfig from_bits(const TreeParams& params, std::uint32_t depth, std::uint64_t bits) {
    SigmaConfig out(params, depth);
    out.assign_bits(bits);
    return out;
  }

  void assign_bits(std::uint64_t bits) {
    for (std::size_t i = 0; i < states_.size(); ++i) {
      states_[i] = static_cast<EdgeState>((bits >> i) & 1U);
    }
  }

  const TreeParams& params() const noexcept { return params_; }
  const TreeShape& shape() const noexcept { return shape_; }
  std::uint32_t depth() const noexcept { return shape_.depth(); }
  std::uint64_t edge_count() const noexcept { return shape_.edge_count(); }

  EdgeState state_at(std::uint64_t i) const { return states_[i]; }
  void set_at(std::uint64_t i, EdgeState s) { states_[i] = s; }
  std::span<const EdgeState> states() const noexcept { return states_; }

  EdgeState state(const EdgeId& e) const { return states_[index_of(e)]; }
  void set(const EdgeId& e, EdgeState s) { states_[index_of(e)] = s; }

  std::uint64_t index_of(const EdgeId& e) const {
    if (!shape_.contains(e.lower.indices())) {
      throw InvalidArgument("edge '" + e.lower.to_string() + "' is not in the truncation");
    }
    return shape_.edge_index(e.lower.indices());
  }

  std::uint64_t open_count() const {
    return static_cast<std::uint64_t>(std::count(states_.begin(), states_.end(), EdgeState::Open));
  }

  friend bool operator==(const SigmaConfig& a, const SigmaConfig& b) {
    return a.params_ == b.params_ && a.shape_ == b.shape_ && a.states_ == b.states_;
  }

 private:
  TreeParams params_;
  TreeShape shape_;
  std::vector<EdgeState> states_;
};

enum class PhiValue : std::int8_t { Minus = -1, Zero = 0, Plus = 1 };

inline char to_char(PhiValue v) noexcept {
  return v == PhiValue::Plus ? '+' : v == PhiValue::Minus ? '-' : '0';
}

inline PhiValue phi_value(EdgeState upper, EdgeState lower) noexcept {
  if (upper == lower) return PhiValue::Zero;
  return upper == EdgeState::Open ? PhiValue::Plus : PhiValue::Minus;
}

// φ over the truncated even-level tree. Addresses here use the even-level
// tree's own indices: child k*i + j of a vertex is its grandchild (i, j) in Γ.
class PhiConfig {
 public:
  PhiConfig(const TreeParams& params, std::uint32_t hat_depth)
      : params_(params), shape_(hat_shape(params, hat_depth)) {
    detail::require_materializable(shape_);
    values_.assign(shape_.edge_count(), PhiValue::Zero);
  }

  const TreeParams& params() const noexcept { return params_; }
  const TreeShape& shape() const noexcept { return shape_; }
  std::uint32_t depth() const noexcept { return shape_.depth(); }
  std::uint64_t edge_count() const noexcept { return shape_.edge_count(); }

  PhiValue value_at(std::uint64_t i) const { return values_[i]; }
  void set_at(std::uint64_t i, PhiValue v) { values_[i] = v; }
  std::span<const PhiValue> values() const noexcept { return values_; }

  PhiValue value(const EdgeId& hat_edge) const {
    if (!shape_.contains(hat_edge.lower.indices())) {
      throw InvalidArgument("hat edge '" + hat_edge.lower.to_string() + "' is not in the truncation");
    }
    return values_[shape_.edge_index(hat_edge.lower.indices())];
  }

  friend bool operator==(const PhiConfig& a, const PhiConfig& b) {
    return a.params_ == b.params_ && a.shape_ == b.shape_ && a.values_ == b.values_;
  }

 private:
  TreeParams params_;
  TreeShape shape_;
  std::vector<PhiValue> values_;
};

// Even-level Γ vertex -> vertex of the even-level tree.
inline VertexAddress gamma_to_hat(const TreeParams& params, const VertexAddress& v) {
  if (v.level() % 2 != 0) throw InvalidHatEdge("vertex '" + v.to_string() + "' is at an odd level");
  std::vector<std::uint32_t> out;
  out.reserve(v.level() / 2);
  for (std::uint32_t i = 0; i < v.level(); i += 2) out.push_back(v[i] * params.k() + v[i + 1]);
  return VertexAddress(std::move(out));
}

inline VertexAddress hat_to_gamma(const TreeParams& params, const VertexAddress& h) {
  std::vector<std::uint32_t> out;
  out.reserve(2 * h.level());
  for (std::uint32_t idx : h.indices()) {
    out.push_back(idx / params.k());
    out.push_back(idx % params.k());
  }
  return VertexAddress(std::move(out));
}

// Splits the even-level edge (x, z) into (l1, l2): l1 = (x, y) nearer the
// root, l2 = (y, z), with y the common endpoint.
inline std::pair<EdgeId, EdgeId> hat_edge_decompose(const TreeParams& params, const VertexAddress& x,
                                                    const VertexAddress& z) {
  if (!is_valid_address(params, x) || !is_valid_address(params, z)) {
    throw InvalidHatEdge("address out of range for this tree");
  }
  if (x.level() % 2 != 0) throw InvalidHatEdge("upper vertex '" + x.to_string() + "' is not at an even level");
  if (z.level() != x.level() + 2 || !x.is_prefix_of(z)) {
    throw InvalidHatEdge("'" + z.to_string() + "' is not a grandchild of '" + x.to_string() + "'");
  }
  VertexAddress y = z.parent();
  return {EdgeId(std::move(y)), EdgeId(z)};
}

namespace detail {

inline void fill_phi(const SigmaConfig& sigma, PhiConfig& phi, std::uint64_t gamma_edge,
                     std::uint32_t level, std::uint64_t& hat_index) {
  if (level == sigma.depth()) return;
  const TreeShape& s = sigma.shape();
  for (std::uint64_t i = 0; i < s.arity_at(level); ++i) {
    std::uint64_t l1 = s.child_edge(gamma_edge, level, i);
    for (std::uint64_t j = 0; j < s.arity(); ++j) {
      std::uint64_t l2 = s.child_edge(l1, level + 1, j);
      phi.set_at(hat_index++, phi_value(sigma.state_at(l1), sigma.state_at(l2)));
      fill_phi(sigma, phi, l2, level + 2, hat_index);
    }
  }
}

}  // namespace detail

// Writes φ_σ into `out`, which must have been built for the same params and
// depth σ.depth / 2.
inline void phi_of_sigma_into(const SigmaConfig& sigma, PhiConfig& out) {
  if (sigma.depth() % 2 != 0) throw OddDepth("sigma depth " + std::to_string(sigma.depth()) + " is odd");
  if (sigma.depth() == 0) throw InvalidArgument("sigma depth must be >= 2");
  if (!(out.params() == sigma.params()) || out.depth() * 2 != sigma.depth()) {
    throw InvalidArgument("phi buffer does not match sigma");
  }
  std::uint64_t hat_index = 0;
  detail::fill_phi(sigma, out, 0, 0, hat_index);
}

inline PhiConfig phi_of_sigma(const SigmaConfig& sigma) {
  if (sigma.depth() % 2 != 0) throw OddDepth("sigma depth " + std::to_string(sigma.depth()) + " is odd");
  PhiConfig out(sigma.params(), sigma.depth() / 2);
  phi_of_sigma_into(sigma, out);
  return out;
}

inline constexpr std::uint64_t kMaxEnumeratedEdges = 22;

// Every configuration of a truncation, in binary-counting order: index c gives
// edge i (preorder) the state Open iff bit i of c is set.
class ConfigEnumeration {
 public:
  ConfigEnumeration(const TreeParams& params, std::uint32_t depth) : params_(params), depth_(depth) {
    TreeShape shape = sigma_shape(params, depth);
    if (shape.edge_count() > kMaxEnumeratedEdges) {
      throw TooLarge("enumeration needs " + std::to_string(shape.edge_count()) + " edges, bound is " +
                     std::to_string(kMaxEnumeratedEdges));
    }
    size_ = std::uint64_t{1} << shape.edge_count();
  }

  std::uint64_t size() const noexcept { return size_; }
  SigmaConfig operator[](std::uint64_t c) const { return SigmaConfig::from_bits(params_, depth_, c); }

  class iterator {
   public:
    using value_type = SigmaConfig;
    using difference_type = std::ptrdiff_t;

    iterator() = default;
    iterator(const ConfigEnumeration* owner, std::uint64_t c) : owner_(owner), c_(c) {}

    SigmaConfig operator*() const { return (*owner_)[c_]; }
    iterator& operator++() {
      ++c_;
      return *this;
    }
    iterator operator++(int) {
      iterator tmp = *this;
      ++c_;
      return tmp;
    }
    friend bool operator==(const iterator& a, const iterator& b) { return a.c_ == b.c_; }

   private:
    const ConfigEnumeration* owner_ = nullptr;
    std::uint64_t c_ = 0;
  };

  iterator begin() const { return {this, 0}; }
  iterator end() const { return {this, size_}; }

 private:
  TreeParams params_;
  std::uint32_t depth_;
  std::uint64_t size_ = 0;
};

inline ConfigEnumeration enumerate_configs(const TreeParams& params, std::uint32_t depth) {
  return ConfigEnumeration(params, depth);
}

// One `address,state` line per edge in preorder, states O/C.
inline void write_sigma(std::ostream& os, const SigmaConfig& sigma) {
  std::vector<EdgeId> edges = preorder_edges(sigma.shape());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    os << edges[i].lower.to_string() << ',' << to_char(sigma.state_at(i)) << '\n';
  }
}

// Same layout for φ; addresses are even-level tree addresses, values + 0 -.
inline void write_phi(std::ostream& os, const PhiConfig& phi) {
  std::vector<EdgeId> edges = preorder_edges(phi.shape());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    os << edges[i].lower.to_string() << ',' << to_char(phi.value_at(i)) << '\n';
  }
}

// Parses the line format written by write_sigma. Blank lines and lines
// starting with '#' are skipped; the depth is the deepest address. The edge
// set must be exactly that of the truncation.
inline SigmaConfig read_sigma(std::istream& is, const TreeParams& params) {
  std::vector<std::pair<VertexAddress, EdgeState>> entries;
  std::string line;
  std::uint32_t depth = 0;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto comma = line.find(',');
    if (comma == std::string::npos || comma + 2 != line.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'address,O|C'");
    }
    VertexAddress v = VertexAddress::parse(std::string_view(line).substr(0, comma));
    if (v.is_root() || !is_valid_address(params, v)) {
      throw ParseError("line " + std::to_string(line_no) + ": address '" + v.to_string() + "' out of range");
    }
    char c = line[comma + 1];
    if (c != 'O' && c != 'C') throw ParseError("line " + std::to_string(line_no) + ": state must be O or C");
    depth = std::max(depth, v.level());
    entries.emplace_back(std::move(v), c == 'O' ? EdgeState::Open : EdgeState::Closed);
  }
  if (entries.empty()) throw ParseError("empty sigma configuration");
  SigmaConfig sigma(params, depth);
  if (entries.size() != sigma.edge_count()) {
    throw ParseError("expected " + std::to_string(sigma.edge_count()) + " edges for depth " +
                     std::to_string(depth) + ", got " + std::to_string(entries.size()));
  }
  std::vector<bool> seen(sigma.edge_count(), false);
  for (auto& [v, s] : entries) {
    std::uint64_t i = sigma.index_of(EdgeId(v));
    if (seen[i]) throw ParseError("duplicate edge '" + v.to_string() + "'");
    seen[i] = true;
    sigma.set_at(i, s);
  }
  return sigma;
}

}  // namespace zebra
