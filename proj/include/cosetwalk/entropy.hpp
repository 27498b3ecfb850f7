#pragma once

// Exact n-step distributions on coset spaces and the increment estimator
//   h(lambda) = lim / inf_n  E_lambda[ H(mu_K^n) - H(mu_K^{n-1}) ].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cover.hpp"
#include "errors.hpp"
#include "group.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "spaces.hpp"

namespace cosetwalk {

// Finitely supported distribution on interned vertices, sorted by id.
class SparseDist {
 public:
  SparseDist() = default;
  explicit SparseDist(std::vector<std::pair<VertexId, double>> mass) : mass_(std::move(mass)) {}

  static SparseDist point(VertexId v) { return SparseDist({{v, 1.0}}); }

  const std::vector<std::pair<VertexId, double>>& entries() const noexcept { return mass_; }
  std::size_t support_size() const noexcept { return mass_.size(); }

  double total() const {
    double t = 0.0;
    for (const auto& [v, m] : mass_) t += m;
    return t;
  }

  double at(VertexId v) const {
    auto it = std::lower_bound(mass_.begin(), mass_.end(), v,
                               [](const auto& e, VertexId key) { return e.first < key; });
    return (it != mass_.end() && it->first == v) ? it->second : 0.0;
  }

 private:
  std::vector<std::pair<VertexId, double>> mass_;
};

// One convolution step: (evolve d)(u) = sum over v, l with v.l = u of d(v) mu(l).
template <class Table>
SparseDist evolve(Table& table, const SparseDist& d, const StepMeasure& mu) {
  const auto& in = d.entries();
  std::vector<std::array<VertexId, 4>> targets(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (Letter l : kLetters) targets[i][index(l)] = table.step(in[i].first, l);
  }
  std::vector<double> acc(table.size(), 0.0);
  std::vector<VertexId> touched;
  touched.reserve(in.size() * 2);
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (Letter l : kLetters) {
      const VertexId u = targets[i][index(l)];
      if (acc[u] == 0.0) touched.push_back(u);
      acc[u] += in[i].second * mu(l);
    }
  }
  std::sort(touched.begin(), touched.end());
  std::vector<std::pair<VertexId, double>> out;
  out.reserve(touched.size());
  for (VertexId u : touched) out.emplace_back(u, acc[u]);
  return SparseDist(std::move(out));
}

// Natural-log Shannon entropy, 0 log 0 = 0.
inline double shannon_entropy(const SparseDist& d) {
  double h = 0.0;
  for (const auto& [v, m] : d.entries()) {
    if (m > 0.0) h -= m * std::log(m);
  }
  return h;
}

// delta_n = H(mu_K^n) - H(mu_K^{n-1}) for n = 1..n_max, walking from the
// space's root, with H(mu_K^0) = 0.
template <CosetSpace S, class Table = ExactTable<S>>
std::vector<double> entropy_increments(const S& space, const StepMeasure& mu, int n_max) {
  if (n_max < 1) throw PreconditionError("n_max must be >= 1");
  Table table(space);
  SparseDist d = SparseDist::point(table.root());
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n_max));
  double prev = 0.0;
  for (int n = 1; n <= n_max; ++n) {
    d = evolve(table, d, mu);
    const double h = shannon_entropy(d);
    out.push_back(h - prev);
    prev = h;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Invariant random subgroups

struct TrivialSubgroup {};
struct FullGroup {};
// kappa = 1/2 delta_A + 1/2 delta_B, A/B the normal closures of a/b.
struct ZQuotientMix {};
// eta_n: uniform on the 2n-1 conjugates of K_n.
struct ConjClassKn {
  std::int64_t n;
};
// Psi_* eta_{n,p}: conjugate of K_n with i.i.d. Bernoulli(p) open cells.
struct PercolationKn {
  std::int64_t n;
  double p;
};

using IrsSpec = std::variant<TrivialSubgroup, FullGroup, ZQuotientMix, ConjClassKn, PercolationKn>;

inline std::string to_string(const IrsSpec& irs) {
  struct {
    std::string operator()(TrivialSubgroup) const { return "trivial"; }
    std::string operator()(FullGroup) const { return "full"; }
    std::string operator()(ZQuotientMix) const { return "zmix"; }
    std::string operator()(ConjClassKn c) const { return "conj-kn:" + std::to_string(c.n); }
    std::string operator()(PercolationKn c) const {
      char buf[64];
      std::snprintf(buf, sizeof buf, "perc-kn:%lld,p=%.17g", static_cast<long long>(c.n), c.p);
      return buf;
    }
  } visitor;
  return std::visit(visitor, irs);
}

inline bool is_atomic(const IrsSpec& irs) { return !std::holds_alternative<PercolationKn>(irs); }

struct EntropyEstimate {
  std::string irs;
  std::vector<double> increments;
  std::vector<double> stderr_;  // per increment, across IRS samples; 0 for exact atomic averages
  double point_estimate = 0.0;  // increments.back(): an upper estimate of h
  std::size_t samples = 0;
  int n_max = 0;
  std::uint64_t seed = 0;
  bool exact = false;
  // Per-sample increments (percolation only), kept for coupling checks.
  std::vector<std::vector<double>> per_sample;
};

// Stream domain tags keep draws for different purposes independent.
enum class StreamDomain : std::uint64_t { IrsSample = 1, Walk = 2 };

// Sampler seed of IRS sample i; shared by every p so that sweeps are coupled.
inline std::uint64_t irs_sample_seed(std::uint64_t master_seed, std::size_t i) {
  StreamRng rng(master_seed, {static_cast<std::uint64_t>(StreamDomain::IrsSample), i});
  return rng();
}

namespace detail {

inline void add_scaled(std::vector<double>& acc, const std::vector<double>& x, double w) {
  if (acc.empty()) acc.assign(x.size(), 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) acc[k] += w * x[k];
}

}  // namespace detail

// Increments of one percolation sample: the exact average over all 2n-1
// conjugate roots of the cover built from a single cell configuration.
template <CellSampler Sampler = CellStatusSampler>
std::vector<double> percolation_sample_increments(std::int64_t n, const Sampler& sampler, const StepMeasure& mu,
                                                  int n_max) {
  const auto roots = conjugate_roots(n);
  const double w = 1.0 / static_cast<double>(roots.size());
  std::vector<double> acc;
  for (const auto& r : roots) {
    BasicCoverSpace<Sampler> cover(KnSpace(n, r), sampler);
    detail::add_scaled(acc, entropy_increments(cover, mu, n_max), w);
  }
  return acc;
}

// Atoms (space, weight) of an atomic IRS, evaluated through `fn(space, weight)`.
template <class Fn>
void for_each_atom(const IrsSpec& irs, Fn&& fn) {
  if (std::holds_alternative<TrivialSubgroup>(irs)) {
    fn(TrivialSpace{}, 1.0);
  } else if (std::holds_alternative<FullGroup>(irs)) {
    fn(FullGroupSpace{}, 1.0);
  } else if (std::holds_alternative<ZQuotientMix>(irs)) {
    fn(ZQuotientSpace(Axis::A), 0.5);
    fn(ZQuotientSpace(Axis::B), 0.5);
  } else if (const auto* c = std::get_if<ConjClassKn>(&irs)) {
    if (c->n < 1) throw PreconditionError("K_n requires n >= 1");
    const auto roots = conjugate_roots(c->n);
    for (const auto& r : roots) fn(KnSpace(c->n, r), 1.0 / static_cast<double>(roots.size()));
  } else {
    throw PreconditionError("percolation IRS has no finite atom list");
  }
}

inline EntropyEstimate irs_entropy_estimate(const IrsSpec& irs, const StepMeasure& mu, int n_max,
                                            std::size_t samples, std::uint64_t master_seed,
                                            unsigned threads = 1) {
  if (n_max < 1) throw PreconditionError("n_max must be >= 1");
  EntropyEstimate est;
  est.irs = to_string(irs);
  est.n_max = n_max;
  est.seed = master_seed;

  if (is_atomic(irs)) {
    std::size_t atoms = 0;
    for_each_atom(irs, [&](const auto& space, double w) {
      detail::add_scaled(est.increments, entropy_increments(space, mu, n_max), w);
      ++atoms;
    });
    est.stderr_.assign(est.increments.size(), 0.0);
    est.samples = atoms;
    est.exact = true;
  } else {
    const auto perc = std::get<PercolationKn>(irs);
    if (samples < 1) throw PreconditionError("samples must be >= 1");
    CellStatusSampler(0, perc.p);  // validates p
    std::vector<std::vector<double>> per(samples);
    parallel_for(samples, threads, [&](std::size_t i) {
      const CellStatusSampler sampler(irs_sample_seed(master_seed, i), perc.p);
      per[i] = percolation_sample_increments(perc.n, sampler, mu, n_max);
    });
    // Welford accumulation in sample-index order.
    const auto k = static_cast<std::size_t>(n_max);
    std::vector<double> mean(k, 0.0), m2(k, 0.0);
    for (std::size_t i = 0; i < samples; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const double delta = per[i][j] - mean[j];
        mean[j] += delta / static_cast<double>(i + 1);
        m2[j] += delta * (per[i][j] - mean[j]);
      }
    }
    est.increments = mean;
    est.stderr_.assign(k, 0.0);
    if (samples > 1) {
      for (std::size_t j = 0; j < k; ++j) {
        est.stderr_[j] = std::sqrt(m2[j] / static_cast<double>(samples - 1) / static_cast<double>(samples));
      }
    }
    est.samples = samples;
    est.per_sample = std::move(per);
  }
  est.point_estimate = est.increments.back();
  return est;
}

// h_max for the uniform measure on F_2: (1/2) ln 3.
inline double hmax_reference() { return 0.5 * std::log(3.0); }

}  // namespace cosetwalk
