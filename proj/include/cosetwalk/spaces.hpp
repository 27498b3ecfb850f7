#pragma once

// Coset spaces K\G of the rank-2 free group as rooted deterministic automata.
//
// A space exposes a canonical `State` per coset, a root, and the right action
// of a letter. Walk engines use states directly; the exact engines intern
// them into a VertexTable and work with dense VertexId handles.

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <optional>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include <boost/container/small_vector.hpp>

#include "errors.hpp"
#include "group.hpp"

namespace cosetwalk {

template <class S>
concept CosetSpace = requires(const S& s, typename S::State& mut, const typename S::State& v, Letter l) {
  typename S::State;
  typename S::Hash;
  { s.root() } -> std::convertible_to<typename S::State>;
  // Applies the letter in place; true iff the coset changed (false for a loop).
  { s.advance(mut, l) } -> std::same_as<bool>;
  // First edge of the loop-collapsed geodesic from the root to v, if v != root.
  { s.first_edge(v) } -> std::same_as<std::optional<Letter>>;
  { s.describe(v) } -> std::convertible_to<std::string>;
  { s.label() } -> std::convertible_to<std::string>;
};

template <CosetSpace S>
typename S::State step(const S& space, typename S::State v, Letter l) {
  space.advance(v, l);
  return v;
}

template <CosetSpace S>
typename S::State walk_from(const S& space, typename S::State v, const Word& w) {
  for (std::size_t i = 0; i < w.size(); ++i) space.advance(v, w[i]);
  return v;
}

// K = {e}: vertices are reduced words.
class TrivialSpace {
 public:
  using State = Word;
  using Hash = WordHash;
  static constexpr bool kTreeLike = true;

  State root() const { return {}; }
  bool advance(State& v, Letter l) const {
    v.push_reduce(l);
    return true;
  }
  std::optional<Letter> first_edge(const State& v) const {
    if (v.empty()) return std::nullopt;
    return v.front();
  }
  std::string describe(const State& v) const { return to_string(v); }
  std::string label() const { return "trivial"; }
};

// K = G: a single coset with four loops.
class FullGroupSpace {
 public:
  struct State {
    friend bool operator==(const State&, const State&) = default;
  };
  struct Hash {
    std::size_t operator()(const State&) const noexcept { return 0; }
  };
  static constexpr bool kTreeLike = true;

  State root() const { return {}; }
  bool advance(State&, Letter) const { return false; }
  std::optional<Letter> first_edge(const State&) const { return std::nullopt; }
  std::string describe(const State&) const { return "G"; }
  std::string label() const { return "full"; }
};

// K = normal closure of one generator; K\G is Z with the killed axis looping.
class ZQuotientSpace {
 public:
  using State = std::int64_t;
  using Hash = std::hash<std::int64_t>;
  static constexpr bool kTreeLike = true;

  explicit ZQuotientSpace(Axis kill_axis) : kill_(kill_axis) {}

  Axis kill_axis() const noexcept { return kill_; }
  State root() const { return 0; }
  bool advance(State& v, Letter l) const {
    if (axis(l) == kill_) return false;
    v += sign(l);
    return true;
  }
  std::optional<Letter> first_edge(const State& v) const {
    if (v == 0) return std::nullopt;
    return make_letter(other(kill_), v > 0 ? +1 : -1);
  }
  std::string describe(const State& v) const { return std::to_string(v); }
  std::string label() const { return std::string("zq:") + axis_char(kill_); }

 private:
  Axis kill_;
};

// One maximal run along an axis in a K_n coset representative.
struct Segment {
  Axis axis;
  std::int64_t disp;
  friend bool operator==(const Segment&, const Segment&) = default;
};

// Canonical representative of a coset of K_n: the coset K_n a^d1 b^d2 ...
// with alternating axes, nonzero displacements, and every displacement but
// the last divisible by n. Empty means K_n itself.
class SegmentVertex {
 public:
  using Segments = boost::container::small_vector<Segment, 4>;

  SegmentVertex() = default;
  SegmentVertex(std::initializer_list<Segment> segs) : segs_(segs) {}
  explicit SegmentVertex(Segments segs) : segs_(std::move(segs)) {}

  const Segments& segments() const noexcept { return segs_; }
  Segments& segments() noexcept { return segs_; }
  bool empty() const noexcept { return segs_.empty(); }
  std::size_t size() const noexcept { return segs_.size(); }

  friend bool operator==(const SegmentVertex& x, const SegmentVertex& y) { return x.segs_ == y.segs_; }

  // True iff the representation invariants hold for parameter n.
  bool valid(std::int64_t n) const {
    for (std::size_t i = 0; i < segs_.size(); ++i) {
      if (segs_[i].disp == 0) return false;
      if (i > 0 && segs_[i].axis == segs_[i - 1].axis) return false;
      if (i + 1 < segs_.size() && segs_[i].disp % n != 0) return false;
    }
    return true;
  }

 private:
  Segments segs_;
};

struct SegmentVertexHash {
  std::size_t operator()(const SegmentVertex& v) const noexcept {
    std::uint64_t h = 0x84222325CBF29CE4ULL;
    for (const Segment& s : v.segments()) {
      h ^= static_cast<std::uint64_t>(s.disp) * 2 + static_cast<std::uint64_t>(s.axis);
      h *= 0x100000001B3ULL;
      h ^= h >> 29;
    }
    return static_cast<std::size_t>(h);
  }
};

inline std::string to_string(const SegmentVertex& v) {
  if (v.empty()) return "e";
  std::string out;
  for (const Segment& s : v.segments()) {
    out += axis_char(s.axis);
    out += '^';
    out += std::to_string(s.disp);
  }
  return out;
}

// Schreier graph of K_n\G. On the a-line (and recursively on every branch)
// offsets that are not multiples of n carry a loop labelled by the other
// axis; offsets divisible by n branch into the other axis.
class KnSpace {
 public:
  using State = SegmentVertex;
  using Hash = SegmentVertexHash;
  static constexpr bool kForbidBigons = true;
  static constexpr bool kTreeLike = true;

  explicit KnSpace(std::int64_t n, SegmentVertex root = {}) : n_(n), root_(std::move(root)) {
    if (n < 1) throw PreconditionError("K_n requires n >= 1");
    if (!root_.valid(n_)) throw PreconditionError("root is not a canonical K_n vertex");
  }

  std::int64_t n() const noexcept { return n_; }
  State root() const { return root_; }
  KnSpace rerooted(SegmentVertex r) const { return KnSpace(n_, std::move(r)); }

  bool advance(State& v, Letter l) const {
    const Axis t = axis(l);
    const int e = sign(l);
    auto& segs = v.segments();
    if (segs.empty()) {
      segs.push_back({t, e});
      return true;
    }
    Segment& last = segs.back();
    if (last.axis == t) {
      last.disp += e;
      if (last.disp == 0) segs.pop_back();
      return true;
    }
    if (last.disp % n_ == 0) {
      segs.push_back({t, e});
      return true;
    }
    return false;
  }

  // Axis of the loop carried by v, if any.
  std::optional<Axis> loop_axis(const State& v) const {
    if (v.empty()) return std::nullopt;
    const Segment& last = v.segments().back();
    if (last.disp % n_ == 0) return std::nullopt;
    return other(last.axis);
  }

  std::optional<Letter> first_edge(const State& v) const { return first_edge_between(root_, v); }

  // First letter of the tree path from `from` to `to` (loops ignored).
  std::optional<Letter> first_edge_between(const State& from, const State& to) const {
    const auto& r = from.segments();
    const auto& s = to.segments();
    const std::size_t m = r.size();
    bool ancestor = m <= s.size();
    for (std::size_t i = 0; ancestor && i + 1 < m; ++i) ancestor = r[i] == s[i];
    if (ancestor && m > 0) {
      const Segment& a = r[m - 1];
      const Segment& b = s[m - 1];
      ancestor = a.axis == b.axis && (a.disp > 0) == (b.disp > 0) && std::abs(a.disp) <= std::abs(b.disp);
    }
    if (ancestor) {
      if (m == 0) {
        if (s.empty()) return std::nullopt;
        return make_letter(s[0].axis, s[0].disp > 0 ? 1 : -1);
      }
      const Segment& a = r[m - 1];
      const Segment& b = s[m - 1];
      if (a.disp != b.disp) return make_letter(b.axis, b.disp > 0 ? 1 : -1);
      if (m == s.size()) return std::nullopt;
      return make_letter(s[m].axis, s[m].disp > 0 ? 1 : -1);
    }
    const Segment& a = r[m - 1];
    return make_letter(a.axis, a.disp > 0 ? -1 : 1);
  }

  std::string describe(const State& v) const { return to_string(v); }

  std::string label() const {
    std::string out = "kn:" + std::to_string(n_);
    if (!root_.empty()) {
      const Segment& s = root_.segments().front();
      out += std::string("@") + axis_char(s.axis) + "^" + std::to_string(s.disp);
    }
    return out;
  }

 private:
  std::int64_t n_;
  SegmentVertex root_;
};

inline KnSpace kn_space(std::int64_t n) { return KnSpace(n); }
inline TrivialSpace trivial_space() { return {}; }
inline FullGroupSpace full_group_space() { return {}; }
inline ZQuotientSpace z_quotient_space(Axis kill_axis) { return ZQuotientSpace(kill_axis); }

// Root of the conjugate a^-i K_n a^i (resp. b): the coset K_n a^i.
inline SegmentVertex conjugate_root(std::int64_t n, Axis ax, std::int64_t i) {
  if (i < 0 || i > n - 1) {
    throw PreconditionError("conjugate index " + std::to_string(i) + " outside [0, " + std::to_string(n - 1) + "]");
  }
  if (i == 0) return {};
  return SegmentVertex{{ax, i}};
}

// The 2n-1 distinct conjugate roots: K_n, then a^1..a^{n-1}, then b^1..b^{n-1}.
inline std::vector<SegmentVertex> conjugate_roots(std::int64_t n) {
  std::vector<SegmentVertex> out{conjugate_root(n, Axis::A, 0)};
  for (std::int64_t i = 1; i < n; ++i) out.push_back(conjugate_root(n, Axis::A, i));
  for (std::int64_t i = 1; i < n; ++i) out.push_back(conjugate_root(n, Axis::B, i));
  return out;
}

using VertexId = std::uint32_t;
inline constexpr VertexId kNoVertex = std::numeric_limits<VertexId>::max();

// Append-only interning table with cached transitions. Not thread-safe;
// each task builds its own.
template <CosetSpace S>
class VertexTable {
 public:
  using State = typename S::State;

  explicit VertexTable(const S& space, std::size_t budget = interning_budget())
      : space_(&space), budget_(budget) {}

  VertexTable(const VertexTable&) = delete;
  VertexTable& operator=(const VertexTable&) = delete;

  const S& space() const noexcept { return *space_; }
  std::size_t size() const noexcept { return states_.size(); }
  std::size_t budget() const noexcept { return budget_; }

  VertexId intern(const State& v) {
    if (auto it = index_.find(v); it != index_.end()) return it->second;
    if (states_.size() >= budget_) throw BudgetExceeded(budget_);
    const auto id = static_cast<VertexId>(states_.size());
    auto [it, inserted] = index_.emplace(v, id);
    states_.push_back(&it->first);
    next_.push_back({kNoVertex, kNoVertex, kNoVertex, kNoVertex});
    return id;
  }

  std::optional<VertexId> find(const State& v) const {
    if (auto it = index_.find(v); it != index_.end()) return it->second;
    return std::nullopt;
  }

  VertexId root() { return intern(space_->root()); }

  VertexId step(VertexId v, Letter l) {
    VertexId cached = next_[v][index(l)];
    if (cached != kNoVertex) return cached;
    VertexId u = intern(cosetwalk::step(*space_, *states_[v], l));
    next_[v][index(l)] = u;
    next_[u][index(inverse(l))] = v;
    return u;
  }

  const State& state(VertexId v) const { return *states_[v]; }

 private:
  const S* space_;
  std::size_t budget_;
  std::unordered_map<State, VertexId, typename S::Hash> index_;
  std::vector<const State*> states_;
  std::vector<std::array<VertexId, 4>> next_;
};

template <class S>
concept TreeLikeSpace = CosetSpace<S> && requires { S::kTreeLike; } && S::kTreeLike;

// Interning table for spaces whose loop-collapsed Schreier graph is a tree.
// A non-loop move that is not the cached move back to the parent always
// reaches a new vertex, so no state lookup is needed. Same interface and the
// same id assignment as VertexTable on such spaces.
template <CosetSpace S>
class TreeVertexTable {
 public:
  using State = typename S::State;

  explicit TreeVertexTable(const S& space, std::size_t budget = interning_budget())
      : space_(&space), budget_(budget) {}

  TreeVertexTable(const TreeVertexTable&) = delete;
  TreeVertexTable& operator=(const TreeVertexTable&) = delete;

  const S& space() const noexcept { return *space_; }
  std::size_t size() const noexcept { return states_.size(); }

  VertexId root() {
    if (states_.empty()) append(space_->root());
    return 0;
  }

  // Starts the table at an arbitrary vertex instead of the root.
  VertexId intern(const State& start) {
    if (!states_.empty()) {
      if (states_[0] == start) return 0;
      throw std::logic_error("TreeVertexTable: intern is only valid for the first vertex");
    }
    return append(start);
  }

  VertexId step(VertexId v, Letter l) {
    VertexId cached = next_[v][index(l)];
    if (cached != kNoVertex) return cached;
    State u = states_[v];
    if (!space_->advance(u, l)) {
      next_[v][index(l)] = v;
      return v;
    }
    const VertexId id = append(std::move(u));
    next_[v][index(l)] = id;
    next_[id][index(inverse(l))] = v;
    return id;
  }

  const State& state(VertexId v) const { return states_[v]; }

 private:
  VertexId append(State s) {
    if (states_.size() >= budget_) throw BudgetExceeded(budget_);
    states_.push_back(std::move(s));
    next_.push_back({kNoVertex, kNoVertex, kNoVertex, kNoVertex});
    return static_cast<VertexId>(states_.size() - 1);
  }

  const S* space_;
  std::size_t budget_;
  std::vector<State> states_;
  std::vector<std::array<VertexId, 4>> next_;
};

// The cheapest correct table for a space.
template <CosetSpace S>
using ExactTable = std::conditional_t<TreeLikeSpace<S>, TreeVertexTable<S>, VertexTable<S>>;

struct BallEdge {
  VertexId src;
  VertexId dst;
  Letter letter;
  friend bool operator==(const BallEdge&, const BallEdge&) = default;
};

// Rooted labelled multigraph: vertices numbered in BFS discovery order
// (letters tried in the order a, A, b, B), all letter moves among them.
struct Ball {
  std::size_t radius = 0;
  std::vector<std::string> names;
  std::vector<std::size_t> depth;
  std::vector<BallEdge> edges;  // one per (vertex, letter) with target inside the ball
  std::size_t bigons = 0;

  std::size_t vertices() const noexcept { return names.size(); }

  // Same shape and labels under the canonical numbering.
  bool isomorphic_to(const Ball& other) const {
    return vertices() == other.vertices() && edges == other.edges;
  }

  std::size_t loop_count() const {
    return static_cast<std::size_t>(std::count_if(edges.begin(), edges.end(), [](const BallEdge& e) {
      return e.src == e.dst && sign(e.letter) > 0;
    }));
  }
};

template <class S>
concept ForbidsBigons = requires { S::kForbidBigons; } && S::kForbidBigons;

template <CosetSpace S, class OnVertex>
Ball ball(const S& space, std::size_t radius, OnVertex&& on_vertex) {
  VertexTable<S> table(space);
  Ball out;
  out.radius = radius;
  table.root();
  out.depth.push_back(0);
  for (VertexId v = 0; v < table.size(); ++v) {
    if (out.depth[v] == radius) continue;
    for (Letter l : kLetters) {
      const std::size_t before = table.size();
      table.step(v, l);
      if (table.size() > before) out.depth.push_back(out.depth[v] + 1);
    }
  }
  const auto count = static_cast<VertexId>(table.size());
  out.names.reserve(count);
  for (VertexId v = 0; v < count; ++v) {
    out.names.push_back(space.describe(table.state(v)));
    on_vertex(v, table.state(v));
  }
  for (VertexId v = 0; v < count; ++v) {
    std::array<VertexId, 4> targets{};
    for (Letter l : kLetters) {
      std::optional<VertexId> u;
      if (out.depth[v] < radius) {
        u = table.step(v, l);
      } else {
        u = table.find(step(space, table.state(v), l));
      }
      targets[index(l)] = u ? *u : kNoVertex;
      if (u) out.edges.push_back({v, *u, l});
    }
    // Two distinct letters (other than an inverse pair) reaching the same
    // neighbour bound a 2-gon.
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        if ((i ^ 1) == j) continue;
        if (targets[i] != kNoVertex && targets[i] == targets[j] && targets[i] != v) ++out.bigons;
      }
    }
  }
  if constexpr (ForbidsBigons<S>) {
    if (out.bigons > 0) throw std::logic_error(space.label() + ": unexpected 2-gon in Schreier graph");
  }
  return out;
}

template <CosetSpace S>
Ball ball(const S& space, std::size_t radius) {
  return ball(space, radius, [](VertexId, const typename S::State&) {});
}

// Acyclicity of the underlying simple graph (loops and parallel edges collapsed).
inline bool is_treelike(const Ball& b) {
  std::vector<std::pair<VertexId, VertexId>> pairs;
  for (const BallEdge& e : b.edges) {
    if (e.src == e.dst) continue;
    pairs.emplace_back(std::min(e.src, e.dst), std::max(e.src, e.dst));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs.size() + 1 == b.vertices();
}

template <CosetSpace S>
bool is_treelike_ball(const S& space, std::size_t radius) {
  return is_treelike(ball(space, radius));
}

namespace fixtures {

// Z^2 = G/[G,G]. Its Schreier graph is the square grid, so it is *not*
// tree-like; used as a negative control.
class AbelianGridSpace {
 public:
  struct State {
    std::int64_t x = 0;
    std::int64_t y = 0;
    friend bool operator==(const State&, const State&) = default;
  };
  struct Hash {
    std::size_t operator()(const State& s) const noexcept {
      return std::hash<std::int64_t>{}(s.x * 1000003 + s.y);
    }
  };

  State root() const { return {}; }
  bool advance(State& v, Letter l) const {
    (axis(l) == Axis::A ? v.x : v.y) += sign(l);
    return true;
  }
  std::optional<Letter> first_edge(const State& v) const {
    if (v.x != 0) return make_letter(Axis::A, v.x > 0 ? 1 : -1);
    if (v.y != 0) return make_letter(Axis::B, v.y > 0 ? 1 : -1);
    return std::nullopt;
  }
  std::string describe(const State& v) const { return std::to_string(v.x) + "," + std::to_string(v.y); }
  std::string label() const { return "fixture:grid"; }
};

}  // namespace fixtures

}  // namespace cosetwalk
