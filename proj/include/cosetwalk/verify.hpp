#pragma once

// Invariant suite behind `cosetwalk verify`. Each check is small enough to
// run in seconds; fixtures swap in deliberately broken components so the
// suite can demonstrate that it detects them.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "boundary.hpp"
#include "cover.hpp"
#include "entropy.hpp"
#include "group.hpp"
#include "rng.hpp"
#include "spaces.hpp"

namespace cosetwalk {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

struct VerifyOptions {
  bool corrupt_automaton = false;  // add the Z^2 grid to the tree-like check
  bool p_dependent_hash = false;   // couple covers through fixtures::PDependentSampler
  std::uint64_t seed = 1;
};

namespace verify_detail {

inline Word random_word(StreamRng& rng, std::size_t max_len) {
  Word w;
  const std::size_t len = rng.below(max_len + 1);
  while (w.size() < len) w.push_reduce(static_cast<Letter>(rng.below(4)));
  return w;
}

template <CosetSpace S>
bool right_action_holds(const S& space, std::uint64_t seed, std::size_t walks, int steps) {
  for (std::size_t w = 0; w < walks; ++w) {
    LetterSource letters(StreamRng(seed, {w}));
    auto v = space.root();
    for (int k = 0; k < steps; ++k) {
      for (Letter l : kLetters) {
        auto u = v;
        space.advance(u, l);
        space.advance(u, inverse(l));
        if (!(u == v)) return false;
      }
      space.advance(v, letters.next());
    }
  }
  return true;
}

// Monotone coupling of one sampler family: cells open at p stay open at q >= p,
// and per-sample increments are ordered along the grid.
template <class MakeSampler>
std::string coupling_violation(MakeSampler make, std::uint64_t seed) {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const KnSpace base(2);
  StreamRng rng(seed, {7});
  for (int k = 0; k < 2000; ++k) {
    auto v = walk_from(base, base.root(), random_word(rng, 12));
    const auto ax = base.loop_axis(v);
    if (!ax) continue;
    const std::uint64_t s = rng();
    bool open_before = false;
    for (double p : grid) {
      const bool open = make(s, p).status(v, *ax) == CellStatus::Open;
      if (open_before && !open) return "cell " + to_string(LoopId{v, *ax}) + " closes as p grows";
      open_before = open;
    }
  }
  const StepMeasure mu = step_measure(2);
  for (std::size_t i = 0; i < 4; ++i) {
    const std::uint64_t s = irs_sample_seed(seed, i);
    std::vector<double> prev;
    for (double p : grid) {
      const auto cur = percolation_sample_increments(2, make(s, p), mu, 8);
      for (std::size_t j = 0; j < prev.size(); ++j) {
        if (prev[j] > cur[j] + 1e-9) return "sample " + std::to_string(i) + ": increment decreases as p grows";
      }
      prev = cur;
    }
  }
  return {};
}

}  // namespace verify_detail

inline std::vector<CheckResult> run_verify(const VerifyOptions& opt = {}) {
  using namespace verify_detail;
  std::vector<CheckResult> out;
  auto check = [&out](std::string name, const std::function<std::string()>& body) {
    try {
      std::string why = body();
      out.push_back({std::move(name), why.empty(), why});
    } catch (const std::exception& e) {
      out.push_back({std::move(name), false, std::string("exception: ") + e.what()});
    }
  };
  const StepMeasure mu = step_measure(2);

  check("group.reduce_concat", [&]() -> std::string {
    StreamRng rng(opt.seed, {1});
    for (int k = 0; k < 500; ++k) {
      const Word x = random_word(rng, 32), y = random_word(rng, 32), z = random_word(rng, 32);
      if (reduce_concat(reduce_concat(x, y), z) != reduce_concat(x, reduce_concat(y, z))) return "not associative";
      if (inverse(inverse(x)) != x) return "inverse is not an involution";
      if (!reduce_concat(x, inverse(x)).empty()) return "w w^-1 != e";
    }
    return {};
  });

  check("group.step_measure", [&]() -> std::string {
    double total = 0.0;
    for (Letter l : kLetters) total += mu(l);
    return total == 1.0 ? "" : "weights do not sum to 1";
  });

  check("spaces.right_action", [&]() -> std::string {
    if (!right_action_holds(TrivialSpace{}, opt.seed, 20, 50)) return "trivial";
    if (!right_action_holds(ZQuotientSpace(Axis::A), opt.seed, 20, 50)) return "zq:a";
    for (std::int64_t n = 1; n <= 4; ++n) {
      for (const auto& r : conjugate_roots(n)) {
        if (!right_action_holds(KnSpace(n, r), opt.seed, 10, 50)) return "kn:" + std::to_string(n);
      }
    }
    const CoverSpace cover(KnSpace(3), CellStatusSampler(opt.seed, 0.5));
    if (!right_action_holds(cover, opt.seed, 10, 50)) return "cover";
    return {};
  });

  check("spaces.kn_generators", [&]() -> std::string {
    for (std::int64_t n = 1; n <= 4; ++n) {
      const KnSpace space(n);
      std::vector<Word> blocks;
      for (Axis ax : {Axis::A, Axis::B}) {
        for (int s : {+1, -1}) {
          Word w;
          for (std::int64_t k = 0; k < n; ++k) w.push_reduce(make_letter(ax, s));
          blocks.push_back(w);
        }
      }
      std::vector<Word> gs{Word{}};
      for (const Word& x : blocks) {
        gs.push_back(x);
        for (const Word& y : blocks) gs.push_back(reduce_concat(x, y));
      }
      for (const Word& g : gs) {
        for (Axis ax : {Axis::A, Axis::B}) {
          for (std::int64_t k = -(n - 1); k <= n - 1; ++k) {
            if (k == 0) continue;
            for (int r = -3; r <= 3; ++r) {
              Word h;
              for (std::int64_t i = 0; i < std::abs(k); ++i) h.push_reduce(make_letter(ax, k > 0 ? 1 : -1));
              for (int i = 0; i < std::abs(r); ++i) h.push_reduce(make_letter(other(ax), r > 0 ? 1 : -1));
              for (std::int64_t i = 0; i < std::abs(k); ++i) h.push_reduce(make_letter(ax, k > 0 ? -1 : 1));
              const Word w = reduce_concat(reduce_concat(g, h), inverse(g));
              if (!walk_from(space, space.root(), w).empty()) {
                return "kn:" + std::to_string(n) + " moves the root along " + to_string(w);
              }
            }
          }
        }
      }
    }
    return {};
  });

  check("spaces.segment_closure", [&]() -> std::string {
    for (std::int64_t n = 1; n <= 4; ++n) {
      const KnSpace space(n);
      LetterSource letters(StreamRng(opt.seed, {2, static_cast<std::uint64_t>(n)}));
      auto v = space.root();
      for (int k = 0; k < 10000; ++k) {
        space.advance(v, letters.next());
        if (!v.valid(n)) return "invalid vertex " + to_string(v);
      }
    }
    return {};
  });

  check("spaces.treelike", [&]() -> std::string {
    if (!is_treelike_ball(TrivialSpace{}, 8)) return "trivial";
    for (std::int64_t n = 1; n <= 4; ++n) {
      if (!is_treelike_ball(KnSpace(n), 8)) return "kn:" + std::to_string(n);
    }
    for (double p : {0.3, 0.7}) {
      if (!is_treelike_ball(CoverSpace(KnSpace(2), CellStatusSampler(opt.seed, p)), 8)) return "cover";
    }
    if (opt.corrupt_automaton && !is_treelike_ball(fixtures::AbelianGridSpace{}, 8)) {
      return "fixture:grid has a cycle";
    }
    return {};
  });

  check("cover.endpoints", [&]() -> std::string {
    for (std::int64_t n : {2, 3}) {
      for (const auto& r : conjugate_roots(n)) {
        const KnSpace base(n, r);
        if (!ball(CoverSpace(base, CellStatusSampler(opt.seed, 0.0)), 6).isomorphic_to(ball(base, 6))) {
          return "p=0 cover differs from " + base.label();
        }
        if (!ball(CoverSpace(base, CellStatusSampler(opt.seed, 1.0)), 6).isomorphic_to(ball(TrivialSpace{}, 6))) {
          return "p=1 cover over " + base.label() + " differs from the trivial space";
        }
      }
    }
    return {};
  });

  check("cover.stabilizer_witness", [&]() -> std::string {
    StreamRng rng(opt.seed, {3});
    for (int k = 0; k < 40; ++k) {
      const std::int64_t n = 2 + static_cast<std::int64_t>(rng.below(2));
      const CoverSpace cover(KnSpace(n), CellStatusSampler(rng(), k % 2 ? 0.3 : 0.7));
      int found = 0;
      while (found < 10) {
        const Word g = random_word(rng, 8);
        const auto v = walk_from(cover.base(), cover.base().root(), g);
        const auto ax = cover.base().loop_axis(v);
        if (!ax) continue;
        ++found;
        const bool filled = cover.sampler().status(v, *ax) == CellStatus::Filled;
        if (stabilizer_witness(cover, g, make_letter(*ax, +1)) != filled) return "witness disagrees at " + to_string(g);
      }
    }
    return {};
  });

  check("cover.monotone_coupling", [&]() -> std::string {
    if (opt.p_dependent_hash) {
      return coupling_violation([](std::uint64_t s, double p) { return fixtures::PDependentSampler(s, p); },
                                opt.seed);
    }
    return coupling_violation([](std::uint64_t s, double p) { return CellStatusSampler(s, p); }, opt.seed);
  });

  check("entropy.mass_conservation", [&]() -> std::string {
    const KnSpace space(3);
    TreeVertexTable<KnSpace> table(space);
    SparseDist d = SparseDist::point(table.root());
    for (int n = 1; n <= 12; ++n) {
      d = evolve(table, d, mu);
      if (std::abs(d.total() - 1.0) > 1e-12) return "mass drifts at step " + std::to_string(n);
    }
    return {};
  });

  check("entropy.monotone_atomic", [&]() -> std::string {
    for (const IrsSpec& irs : {IrsSpec{TrivialSubgroup{}}, IrsSpec{FullGroup{}}, IrsSpec{ZQuotientMix{}},
                               IrsSpec{ConjClassKn{2}}, IrsSpec{ConjClassKn{3}}}) {
      const auto e = irs_entropy_estimate(irs, mu, 10, 1, opt.seed);
      for (std::size_t j = 1; j < e.increments.size(); ++j) {
        if (e.increments[j] > e.increments[j - 1] + 1e-9) return to_string(irs) + " increases";
      }
    }
    return {};
  });

  check("entropy.trivial_bounds", [&]() -> std::string {
    const auto d = entropy_increments(TrivialSpace{}, mu, 10);
    for (double x : d) {
      if (x < hmax_reference() - 1e-6) return "increment below h_max";
    }
    return {};
  });

  check("boundary.returns_exact", [&]() -> std::string {
    const auto r = return_probabilities(TrivialSpace{}, Word{}, 6);
    for (int m = 1; m <= 6; ++m) {
      std::uint64_t back = 0, total = 0;
      for (std::uint64_t code = 0; code < (1ULL << (2 * m)); ++code, ++total) {
        Word w;
        for (int k = 0; k < m; ++k) w.push_reduce(static_cast<Letter>((code >> (2 * k)) & 3));
        back += w.empty();
      }
      if (std::abs(r[m - 1] - static_cast<double>(back) / static_cast<double>(total)) > 1e-12) {
        return "R_" + std::to_string(m) + " mismatch";
      }
    }
    return {};
  });

  check("boundary.shadow_partition", [&]() -> std::string {
    const TrivialSpace space;
    const auto t = detail::endpoint_tallies(space, space.root(), 60, 20000, opt.seed, 1, 1);
    const double inside = 1.0 - static_cast<double>(t[0][4]) / 20000.0;
    if (inside < 0.99) return "only " + std::to_string(inside) + " of walks end in a shadow";
    for (int k = 0; k < 4; ++k) {
      const double x = static_cast<double>(t[0][k]) / 20000.0;
      if (std::abs(x - 0.25) > 3.0 * std::sqrt(0.25 * 0.75 / 20000.0) * 2.0) return "asymmetric shadows";
    }
    return {};
  });

  check("boundary.rn_bounds", [&]() -> std::string {
    auto within = [&](const auto& space) -> std::string {
      for (const auto& sh : shadows_of_root(space)) {
        for (Letter t : kLetters) {
          const Estimate r = rn_ratio(space, sh.letter, t, 30, 4000, opt.seed);
          if (r.value + r.stderr_ < 0.23 || r.value - r.stderr_ > 4.3) {
            return space.label() + " ratio " + std::to_string(r.value);
          }
        }
      }
      return {};
    };
    if (auto e = within(TrivialSpace{}); !e.empty()) return e;
    for (const auto& r : conjugate_roots(3)) {
      if (auto e = within(KnSpace(3, r)); !e.empty()) return e;
    }
    return {};
  });

  return out;
}

}  // namespace cosetwalk
