#pragma once

// Bernoulli percolation on the 1-gon cells of X_{K_n} and the universal cover
// of X_{K_n} minus the removed cells, realized lazily.

#include <bit>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "group.hpp"
#include "rng.hpp"
#include "spaces.hpp"

namespace cosetwalk {

// The 1-gon cell filling the loop labelled `loop_axis` at `base_vertex`.
struct LoopId {
  SegmentVertex base_vertex;
  Axis loop_axis;
  friend bool operator==(const LoopId&, const LoopId&) = default;
};

// Canonical bytes: u64 LE segment count, then per segment the axis byte and
// the displacement as i64 LE, then the loop-axis byte.
inline std::vector<std::uint8_t> canonical_bytes(const LoopId& loop) {
  std::vector<std::uint8_t> out;
  const auto& segs = loop.base_vertex.segments();
  out.reserve(8 + 9 * segs.size() + 1);
  auto put64 = [&out](std::uint64_t x) {
    for (int k = 0; k < 8; ++k) out.push_back(static_cast<std::uint8_t>(x >> (8 * k)));
  };
  put64(segs.size());
  for (const Segment& s : segs) {
    out.push_back(static_cast<std::uint8_t>(s.axis));
    put64(static_cast<std::uint64_t>(s.disp));
  }
  out.push_back(static_cast<std::uint8_t>(loop.loop_axis));
  return out;
}

// keyed_hash64(key, canonical_bytes({vertex, loop_axis})) without materializing the bytes.
inline std::uint64_t loop_hash(std::uint64_t key, const SegmentVertex& vertex, Axis loop_axis) noexcept {
  KeyedHasher h(key);
  const auto& segs = vertex.segments();
  h.put_u64(segs.size());
  for (const Segment& s : segs) {
    h.put_byte(static_cast<std::uint8_t>(s.axis));
    h.put_u64(static_cast<std::uint64_t>(s.disp));
  }
  h.put_byte(static_cast<std::uint8_t>(loop_axis));
  return h.finish();
}

inline std::string to_string(const LoopId& loop) {
  return to_string(loop.base_vertex) + "/" + axis_char(loop.loop_axis);
}

inline std::optional<LoopId> loop_at(const KnSpace& space, const SegmentVertex& v) {
  if (auto ax = space.loop_axis(v)) return LoopId{v, *ax};
  return std::nullopt;
}

// Open: the cell is in omega (removed), so the loop unwinds in the cover.
enum class CellStatus { Open, Filled };

inline const char* to_string(CellStatus s) { return s == CellStatus::Open ? "open" : "filled"; }

// Each cell gets u = keyed_hash64(seed, canonical_bytes) mapped to [0,1);
// the cell is open iff u < p. u does not depend on p, so raising p only
// ever opens more cells.
class CellStatusSampler {
 public:
  CellStatusSampler(std::uint64_t seed, double p) : seed_(seed), p_(p) {
    if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("percolation parameter must lie in [0,1]");
  }

  std::uint64_t seed() const noexcept { return seed_; }
  double p() const noexcept { return p_; }

  double uniform(const SegmentVertex& vertex, Axis loop_axis) const noexcept {
    return to_unit(loop_hash(seed_, vertex, loop_axis));
  }
  double uniform(const LoopId& loop) const noexcept { return uniform(loop.base_vertex, loop.loop_axis); }

  CellStatus status(const SegmentVertex& vertex, Axis loop_axis) const noexcept {
    return uniform(vertex, loop_axis) < p_ ? CellStatus::Open : CellStatus::Filled;
  }
  CellStatus status(const LoopId& loop) const noexcept { return status(loop.base_vertex, loop.loop_axis); }

 private:
  std::uint64_t seed_;
  double p_;
};

inline CellStatus cell_status(const CellStatusSampler& sampler, const LoopId& loop) {
  return sampler.status(loop);
}

template <class T>
concept CellSampler = requires(const T& s, const SegmentVertex& v, Axis ax) {
  { s.status(v, ax) } -> std::same_as<CellStatus>;
  { s.p() } -> std::convertible_to<double>;
};

// Vertex of the universal cover U of X_{K_n} \ omega.
//
// Stored as the reduced label sequence of the geodesic from the cover root in
// the loop-collapsed cover tree, plus its image in the base. The geodesic is
// a complete invariant, so equality and hashing use it alone; the
// loop-crossing word is recovered by crossings().
struct CoverVertex {
  Word path;
  SegmentVertex base;

  friend bool operator==(const CoverVertex& x, const CoverVertex& y) { return x.path == y.path; }
};

struct CoverVertexHash {
  std::size_t operator()(const CoverVertex& v) const noexcept { return WordHash{}(v.path); }
};

struct Crossing {
  LoopId loop;
  int sign;
  friend bool operator==(const Crossing&, const Crossing&) = default;
};

// Coset space of S_{K,omega}: base K_n (rooted at a conjugate root) with the
// cells of omega removed, unwound.
template <CellSampler Sampler = CellStatusSampler>
class BasicCoverSpace {
 public:
  using State = CoverVertex;
  using Hash = CoverVertexHash;
  static constexpr bool kForbidBigons = true;
  static constexpr bool kTreeLike = true;

  BasicCoverSpace(KnSpace base, Sampler sampler) : base_(std::move(base)), sampler_(std::move(sampler)) {}

  const KnSpace& base() const noexcept { return base_; }
  const Sampler& sampler() const noexcept { return sampler_; }

  State root() const { return {Word{}, base_.root()}; }

  bool advance(State& v, Letter l) const {
    if (base_.advance(v.base, l) || sampler_.status(v.base, axis(l)) == CellStatus::Open) {
      v.path.push_reduce(l);
      return true;
    }
    return false;
  }

  std::optional<Letter> first_edge(const State& v) const {
    if (v.path.empty()) return std::nullopt;
    return v.path.front();
  }

  // Reduced sequence of loop crossings along the geodesic.
  std::vector<Crossing> crossings(const State& v) const {
    std::vector<Crossing> out;
    SegmentVertex at = base_.root();
    for (std::size_t i = 0; i < v.path.size(); ++i) {
      const Letter l = v.path[i];
      if (!base_.advance(at, l)) out.push_back({LoopId{at, axis(l)}, sign(l)});
    }
    return out;
  }

  // Status of the cell at base vertex v, if v carries a loop.
  std::optional<CellStatus> loop_status(const SegmentVertex& v) const {
    if (auto ax = base_.loop_axis(v)) return sampler_.status(v, *ax);
    return std::nullopt;
  }

  std::string describe(const State& v) const { return to_string(v.path) + "@" + to_string(v.base); }

  std::string label() const {
    return "cover:" + base_.label() + ",p=" + std::to_string(sampler_.p());
  }

 private:
  KnSpace base_;
  Sampler sampler_;
};

using CoverSpace = BasicCoverSpace<CellStatusSampler>;

inline CoverSpace cover_space(const KnSpace& base, const CellStatusSampler& sampler) {
  return CoverSpace(base, sampler);
}

// Whether g s g^-1 stabilizes the cover root. Requires g to lead (in the base)
// to a vertex whose loop has the axis of s.
template <CellSampler Sampler>
bool stabilizer_witness(const BasicCoverSpace<Sampler>& cover, const Word& g, Letter s) {
  const SegmentVertex end = walk_from(cover.base(), cover.base().root(), g);
  const auto ax = cover.base().loop_axis(end);
  if (!ax || *ax != axis(s)) {
    throw PreconditionError("stabilizer witness: g = " + to_string(g) + " does not end at a loop labelled " +
                            std::string(1, axis_char(axis(s))));
  }
  auto v = cover.root();
  for (std::size_t i = 0; i < g.size(); ++i) cover.advance(v, g[i]);
  cover.advance(v, s);
  const Word back = inverse(g);
  for (std::size_t i = 0; i < back.size(); ++i) cover.advance(v, back[i]);
  return v == cover.root();
}

namespace fixtures {

// Breaks the shared-uniform coupling by mixing p into the hash key; a
// negative control for the coupling checks.
class PDependentSampler {
 public:
  PDependentSampler(std::uint64_t seed, double p) : seed_(seed), p_(p) {}
  double p() const noexcept { return p_; }
  std::uint64_t seed() const noexcept { return seed_; }
  CellStatus status(const SegmentVertex& vertex, Axis loop_axis) const noexcept {
    const std::uint64_t key = seed_ ^ std::bit_cast<std::uint64_t>(p_);
    return to_unit(loop_hash(key, vertex, loop_axis)) < p_ ? CellStatus::Open : CellStatus::Filled;
  }

 private:
  std::uint64_t seed_;
  double p_;
};

}  // namespace fixtures

}  // namespace cosetwalk
