#pragma once

// Shadows of the root, finite-horizon hitting probabilities, the rho-formula
// entropy estimator and return-time diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cover.hpp"
#include "entropy.hpp"
#include "errors.hpp"
#include "group.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "spaces.hpp"

namespace cosetwalk {

// Shd(root.l): vertices whose loop-collapsed geodesic from the root starts
// with the edge labelled l.
template <CosetSpace S>
struct Shadow {
  Letter letter;
  typename S::State anchor;
};

// Proper neighbours of the root, one shadow each; loops at the root are
// excluded.
template <CosetSpace S>
std::vector<Shadow<S>> shadows_of_root(const S& space) {
  std::vector<Shadow<S>> out;
  for (Letter l : kLetters) {
    auto v = space.root();
    if (space.advance(v, l)) out.push_back({l, std::move(v)});
  }
  return out;
}

template <CosetSpace S>
std::optional<Shadow<S>> shadow_of(const S& space, Letter l) {
  auto v = space.root();
  if (!space.advance(v, l)) return std::nullopt;
  return Shadow<S>{l, std::move(v)};
}

template <CosetSpace S>
bool shadow_membership(const S& space, const Shadow<S>& sh, const typename S::State& v) {
  const auto first = space.first_edge(v);
  return first && *first == sh.letter;
}

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

namespace detail {

// Walk endpoints classified by the first geodesic edge from the root; slot 4
// counts walks that end at the root.
using EndpointCounts = std::array<std::uint64_t, 5>;

inline std::size_t endpoint_slot(std::optional<Letter> first) { return first ? index(*first) : 4; }

inline constexpr std::size_t kChunks = 64;

// Per-batch endpoint counts of `walks` walks of length `steps` from `start`.
// Walk w draws from the stream (stream_seed, Walk, w) and belongs to batch
// w * batches / walks. Integer tallies make the result independent of
// scheduling.
template <CosetSpace S>
std::vector<EndpointCounts> endpoint_tallies(const S& space, const typename S::State& start, int steps,
                                             std::size_t walks, std::uint64_t stream_seed, std::size_t batches,
                                             unsigned threads) {
  const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(walks, 1));
  std::vector<std::vector<EndpointCounts>> part(chunks, std::vector<EndpointCounts>(batches, EndpointCounts{}));
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = walks * c / chunks, hi = walks * (c + 1) / chunks;
    for (std::size_t w = lo; w < hi; ++w) {
      LetterSource letters(StreamRng(stream_seed, {static_cast<std::uint64_t>(StreamDomain::Walk), w}));
      auto v = start;
      for (int k = 0; k < steps; ++k) space.advance(v, letters.next());
      ++part[c][w * batches / walks][endpoint_slot(space.first_edge(v))];
    }
  });
  std::vector<EndpointCounts> out(batches, EndpointCounts{});
  for (const auto& p : part) {
    for (std::size_t b = 0; b < batches; ++b) {
      for (std::size_t k = 0; k < 5; ++k) out[b][k] += p[b][k];
    }
  }
  return out;
}

inline Estimate proportion(std::uint64_t hits, std::size_t walks) {
  const double x = static_cast<double>(hits) / static_cast<double>(walks);
  return {x, std::sqrt(x * (1.0 - x) / static_cast<double>(walks))};
}

}  // namespace detail

// Pr(Z_steps(start) in sh), estimated from `walks` walks.
template <CosetSpace S>
Estimate hitting_probability(const S& space, const typename S::State& start, const Shadow<S>& sh, int steps,
                             std::size_t walks, std::uint64_t seed, unsigned threads = 1) {
  if (steps < 1) throw PreconditionError("hitting probability needs n >= 1");
  if (walks < 1) throw PreconditionError("walks must be >= 1");
  const auto t = detail::endpoint_tallies(space, start, steps, walks, seed, 1, threads);
  return detail::proportion(t[0][index(sh.letter)], walks);
}

// nu_{K t^-1}(B_s) / nu_K(B_s), both hitting probabilities taken at horizon
// `steps` on the same walk streams.
template <CosetSpace S>
Estimate rn_ratio(const S& space, Letter s, Letter t, int steps, std::size_t walks, std::uint64_t seed,
                  unsigned threads = 1) {
  const auto sh = shadow_of(space, s);
  if (!sh) throw DegenerateRatio(space.label() + ": no shadow in direction " + std::string(1, to_char(s)));
  auto start = space.root();
  space.advance(start, inverse(t));
  const Estimate num = hitting_probability(space, start, *sh, steps, walks, seed, threads);
  const Estimate den = hitting_probability(space, space.root(), *sh, steps, walks, seed, threads);
  if (den.value == 0.0 || (num.value <= 3.0 * num.stderr_ && den.value <= 3.0 * den.stderr_)) {
    throw DegenerateRatio(space.label() + ": hitting probabilities indistinguishable from 0");
  }
  const double r = num.value / den.value;
  double rel = std::pow(den.stderr_ / den.value, 2);
  if (num.value > 0.0) rel += std::pow(num.stderr_ / num.value, 2);
  return {r, r * std::sqrt(rel)};
}

inline constexpr double kRhoClamp = 1.3862943611198906;  // ln 4

// F(x, y) = clamp(-x ln(y/x), -C, C), F(0, .) = 0, F(x, 0) = C.
inline double rho_f(double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return kRhoClamp;
  return std::clamp(-x * std::log(y / x), -kRhoClamp, kRhoClamp);
}

namespace detail {

inline constexpr std::size_t kRhoBatches = 20;

// sum_t mu(t) sum_s F(x_s, y_{s,t}) from endpoint counts: `root` for walks
// from the root, `from[t]` for walks from root.t^-1.
inline double rho_sum(const std::vector<Letter>& shadow_letters, const EndpointCounts& root,
                      const std::array<const EndpointCounts*, 4>& from, std::uint64_t walks,
                      const StepMeasure& mu) {
  const auto w = static_cast<double>(walks);
  double total = 0.0;
  for (Letter t : kLetters) {
    double inner = 0.0;
    for (Letter s : shadow_letters) {
      inner += rho_f(static_cast<double>(root[index(s)]) / w, static_cast<double>((*from[index(t)])[index(s)]) / w);
    }
    total += mu(t) * inner;
  }
  return total;
}

// rho_n for one rooted space, with a batch-means standard error.
template <CosetSpace S>
Estimate rho_for_space(const S& space, const StepMeasure& mu, int steps, std::size_t walks, std::uint64_t stream_seed,
                       unsigned threads) {
  const auto shadows = shadows_of_root(space);
  if (shadows.empty()) return {0.0, 0.0};
  std::vector<Letter> letters;
  for (const auto& sh : shadows) letters.push_back(sh.letter);
  const std::size_t batches = std::min(kRhoBatches, walks);

  const auto root_tally = endpoint_tallies(space, space.root(), steps, walks, stream_key(stream_seed, {0}), batches,
                                           threads);
  std::array<std::vector<EndpointCounts>, 4> tallies;
  std::array<const std::vector<EndpointCounts>*, 4> source{};
  for (Letter t : kLetters) {
    auto start = space.root();
    if (space.advance(start, inverse(t))) {
      tallies[index(t)] = endpoint_tallies(space, start, steps, walks,
                                           stream_key(stream_seed, {1 + static_cast<std::uint64_t>(index(t))}),
                                           batches, threads);
      source[index(t)] = &tallies[index(t)];
    } else {
      source[index(t)] = &root_tally;
    }
  }

  auto combine = [&](auto pick, std::uint64_t count) {
    EndpointCounts r = pick(root_tally);
    std::array<EndpointCounts, 4> f;
    std::array<const EndpointCounts*, 4> fp{};
    for (int k = 0; k < 4; ++k) {
      f[k] = pick(*source[k]);
      fp[k] = &f[k];
    }
    return rho_sum(letters, r, fp, count, mu);
  };
  auto sum_all = [](const std::vector<EndpointCounts>& v) {
    EndpointCounts out{};
    for (const auto& c : v) {
      for (std::size_t k = 0; k < 5; ++k) out[k] += c[k];
    }
    return out;
  };
  Estimate est;
  est.value = combine(sum_all, walks);
  if (batches > 1) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t b = 0; b < batches; ++b) {
      const std::uint64_t count = walks * (b + 1) / batches - walks * b / batches;
      const double x = combine([b](const std::vector<EndpointCounts>& v) { return v[b]; }, count);
      const double delta = x - mean;
      mean += delta / static_cast<double>(b + 1);
      m2 += delta * (x - mean);
    }
    est.stderr_ = std::sqrt(m2 / static_cast<double>(batches - 1) / static_cast<double>(batches));
  }
  return est;
}

}  // namespace detail

// lambda-average of rho_n. Atomic IRS: exact average over atoms, batch-means
// error. Percolation: `samples` cell configurations, each averaged over all
// conjugate roots; error from the spread across samples.
inline Estimate rho_entropy_estimate(const IrsSpec& irs, const StepMeasure& mu, int steps, std::size_t walks,
                                     std::size_t samples, std::uint64_t master_seed, unsigned threads = 1) {
  if (steps < 1) throw PreconditionError("rho estimator needs n >= 1");
  if (walks < 1) throw PreconditionError("walks must be >= 1");
  const auto walk_seed = [&](std::uint64_t sample, std::uint64_t atom) {
    return stream_key(master_seed, {static_cast<std::uint64_t>(StreamDomain::Walk), sample, atom});
  };
  if (is_atomic(irs)) {
    Estimate out;
    double var = 0.0;
    std::uint64_t atom = 0;
    for_each_atom(irs, [&](const auto& space, double w) {
      const Estimate e = detail::rho_for_space(space, mu, steps, walks, walk_seed(0, atom++), threads);
      out.value += w * e.value;
      var += w * w * e.stderr_ * e.stderr_;
    });
    out.stderr_ = std::sqrt(var);
    return out;
  }
  const auto perc = std::get<PercolationKn>(irs);
  if (samples < 1) throw PreconditionError("samples must be >= 1");
  const auto roots = conjugate_roots(perc.n);
  std::vector<double> per(samples, 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const CellStatusSampler sampler(irs_sample_seed(master_seed, i), perc.p);
    for (std::size_t r = 0; r < roots.size(); ++r) {
      const CoverSpace cover(KnSpace(perc.n, roots[r]), sampler);
      per[i] += detail::rho_for_space(cover, mu, steps, walks, walk_seed(i, r), threads).value /
                static_cast<double>(roots.size());
    }
  }
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double delta = per[i] - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (per[i] - mean);
  }
  Estimate out{mean, 0.0};
  if (samples > 1) out.stderr_ = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
  return out;
}

// ---------------------------------------------------------------------------
// Returns

// Exact R_1..R_m_max from `start` by sparse DP.
template <CosetSpace S>
std::vector<double> return_probabilities(const S& space, const typename S::State& start, int m_max) {
  if (m_max < 1) throw PreconditionError("m_max must be >= 1");
  ExactTable<S> table(space);
  const VertexId s = table.intern(start);
  SparseDist d = SparseDist::point(s);
  std::vector<double> out;
  const StepMeasure mu = step_measure(2);
  for (int m = 1; m <= m_max; ++m) {
    d = evolve(table, d, mu);
    out.push_back(d.at(s));
  }
  return out;
}

// Largest m for which the exact return tail is attached to tail estimates.
inline constexpr int kExactTailLimit = 12;

struct TailEstimate {
  Estimate revisit;  // fraction of walks back at start at some m in [n, horizon]
  int n = 0;
  int horizon = 0;
  // sum_{m=n}^{min(horizon,12)} R_m: a union bound on the returns in that window.
  std::optional<double> exact_window_bound;
};

namespace detail {

template <CosetSpace S, class Visit>
void run_walks(const S& space, const typename S::State& start, int horizon, std::size_t walks, std::uint64_t seed,
               unsigned threads, std::vector<std::uint64_t>& sums, std::vector<std::uint64_t>& sq, Visit visit) {
  const std::size_t chunks = std::min(kChunks, std::max<std::size_t>(walks, 1));
  sums.assign(chunks, 0);
  sq.assign(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = walks * c / chunks, hi = walks * (c + 1) / chunks;
    for (std::size_t w = lo; w < hi; ++w) {
      LetterSource letters(StreamRng(seed, {static_cast<std::uint64_t>(StreamDomain::Walk), w}));
      auto v = start;
      std::uint64_t x = visit(0, v == start);
      for (int m = 1; m <= horizon; ++m) {
        space.advance(v, letters.next());
        x += visit(m, v == start);
      }
      sums[c] += x;
      sq[c] += x * x;
    }
  });
}

inline Estimate mean_of(const std::vector<std::uint64_t>& sums, const std::vector<std::uint64_t>& sq,
                        std::size_t walks) {
  std::uint64_t s = 0, q = 0;
  for (std::size_t c = 0; c < sums.size(); ++c) {
    s += sums[c];
    q += sq[c];
  }
  const auto w = static_cast<double>(walks);
  const double mean = static_cast<double>(s) / w;
  const double var = walks > 1 ? std::max(0.0, (static_cast<double>(q) - w * mean * mean) / (w - 1.0)) : 0.0;
  return {mean, std::sqrt(var / w)};
}

}  // namespace detail

template <CosetSpace S>
TailEstimate tail_return_estimate(const S& space, const typename S::State& start, int n, int horizon,
                                  std::size_t walks, std::uint64_t seed, unsigned threads = 1) {
  if (n < 0 || horizon < n) throw PreconditionError("tail estimate needs 0 <= n <= horizon");
  if (walks < 1) throw PreconditionError("walks must be >= 1");
  const std::size_t chunks = std::min(detail::kChunks, walks);
  std::vector<std::uint64_t> hits(chunks, 0);
  parallel_for(chunks, threads, [&](std::size_t c) {
    const std::size_t lo = walks * c / chunks, hi = walks * (c + 1) / chunks;
    for (std::size_t w = lo; w < hi; ++w) {
      LetterSource letters(StreamRng(seed, {static_cast<std::uint64_t>(StreamDomain::Walk), w}));
      auto v = start;
      bool hit = n == 0;
      for (int m = 1; m <= horizon && !hit; ++m) {
        space.advance(v, letters.next());
        hit = m >= n && v == start;
      }
      hits[c] += hit ? 1 : 0;
    }
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  TailEstimate out;
  out.revisit = detail::proportion(total, walks);
  out.n = n;
  out.horizon = horizon;
  if (n >= 1 && n <= kExactTailLimit) {
    const auto r = return_probabilities(space, start, std::min(horizon, kExactTailLimit));
    double bound = 0.0;
    for (int m = n; m <= std::min(horizon, kExactTailLimit); ++m) bound += r[static_cast<std::size_t>(m - 1)];
    out.exact_window_bound = bound;
  }
  return out;
}

// Mean of #{0 <= m <= horizon : Z_m = start}.
template <CosetSpace S>
Estimate expected_returns(const S& space, const typename S::State& start, int horizon, std::size_t walks,
                          std::uint64_t seed, unsigned threads = 1) {
  if (horizon < 1) throw PreconditionError("horizon must be >= 1");
  if (walks < 1) throw PreconditionError("walks must be >= 1");
  std::vector<std::uint64_t> sums, sq;
  detail::run_walks(space, start, horizon, walks, seed, threads, sums, sq,
                    [](int, bool at_start) -> std::uint64_t { return at_start ? 1 : 0; });
  return detail::mean_of(sums, sq, walks);
}

struct ReturnStats {
  std::vector<double> exact_R;
  TailEstimate tail_estimate;
  Estimate expected_returns;
};

template <CosetSpace S>
ReturnStats return_stats(const S& space, const typename S::State& start, int m_max, int n, int horizon,
                         std::size_t walks, std::uint64_t seed, unsigned threads = 1) {
  ReturnStats out;
  out.exact_R = return_probabilities(space, start, m_max);
  out.tail_estimate = tail_return_estimate(space, start, n, horizon, walks, seed, threads);
  out.expected_returns = expected_returns(space, start, horizon, walks, stream_key(seed, {1}), threads);
  return out;
}

}  // namespace cosetwalk
