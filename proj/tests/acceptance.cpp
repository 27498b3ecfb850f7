// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <cosetwalk.hpp>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <sys/wait.h>
#include <vector>

using namespace cosetwalk;

namespace {

const StepMeasure mu = step_measure(2);

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Brute force over all 4^n letter sequences, as free reduced words.
struct FreeWalk {
  std::vector<std::pair<Word, double>> paths;
  explicit FreeWalk(int n) {
    paths.emplace_back(Word{}, 1.0);
    for (int k = 0; k < n; ++k) {
      std::vector<std::pair<Word, double>> next;
      next.reserve(paths.size() * 4);
      for (const auto& [w, m] : paths) {
        for (Letter l : kLetters) next.emplace_back(reduce_concat(w, Word::from_letters({l})), m * 0.25);
      }
      paths = std::move(next);
    }
  }
  double return_probability() const {
    double r = 0.0;
    for (const auto& [w, m] : paths) r += w.empty() ? m : 0.0;
    return r;
  }
  double entropy() const {
    std::map<std::string, double> law;
    for (const auto& [w, m] : paths) law[to_string(w)] += m;
    double h = 0.0;
    for (const auto& [w, m] : law) h -= m * std::log(m);
    return h;
  }
};

Outcome c1_trivial_increments() {
  const auto d = entropy_increments(TrivialSpace{}, mu, 12);
  const double h = hmax_reference();
  bool ok = true;
  for (std::size_t j = 0; j < d.size(); ++j) {
    ok = ok && d[j] > 0.0 && d[j] >= h - 1e-6;
    if (j > 0) ok = ok && d[j] <= d[j - 1] + 1e-9;
  }
  ok = ok && d[11] <= h + 0.07;
  return {ok, fmt("delta_1=%.6f delta_12=%.6f bound=%.6f", d[0], d[11], h + 0.07)};
}

Outcome c2_rho_trivial() {
  const Estimate r = rho_entropy_estimate(TrivialSubgroup{}, mu, 40, 200000, 1, 2024);
  const double gap = std::abs(r.value - hmax_reference());
  return {gap <= 0.01 + 2 * r.stderr_, fmt("rho=%.6f stderr=%.6f target=%.6f", r.value, r.stderr_, hmax_reference())};
}

Outcome c3_zero_entropy() {
  const auto full = irs_entropy_estimate(FullGroup{}, mu, 20, 1, 0);
  bool zero = true;
  for (double x : full.increments) zero = zero && x == 0.0;
  const auto z = irs_entropy_estimate(ZQuotientMix{}, mu, 20, 1, 0);
  return {zero && z.point_estimate <= 0.06, fmt("full all zero=%d zmix delta_20=%.6f", zero, z.point_estimate)};
}

Outcome c4_endpoints() {
  bool ok = true;
  double worst = 0.0;
  std::string bad;
  for (std::int64_t n : {2, 3}) {
    for (const auto& r : conjugate_roots(n)) {
      const KnSpace base(n, r);
      for (double p : {0.0, 1.0}) {
        const auto t0 = std::chrono::steady_clock::now();
        const Ball c = ball(CoverSpace(base, CellStatusSampler(17, p)), 8);
        const bool iso = p == 0.0 ? c.isomorphic_to(ball(base, 8)) : c.isomorphic_to(ball(TrivialSpace{}, 8));
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        worst = std::max(worst, s);
        if (!iso || s >= 1.0) {
          ok = false;
          bad += " " + base.label() + fmt("@p=%g", p);
        }
      }
    }
  }
  return {ok, fmt("slowest check %.3fs", worst) + (bad.empty() ? "" : " failed:" + bad)};
}

Outcome c5_stabilizers() {
  StreamRng rng(55, {0});
  std::size_t checked = 0, failures = 0;
  for (int c = 0; c < 100; ++c) {
    const std::int64_t n = 2 + static_cast<std::int64_t>(rng.below(2));  // K_1 has no loops
    const double p = c % 2 ? 0.3 : 0.7;
    const CoverSpace cover(KnSpace(n), CellStatusSampler(rng(), p));
    int found = 0;
    while (found < 20) {
      Word g;
      const std::size_t len = 1 + rng.below(12);
      for (std::size_t i = 0; i < len; ++i) g.push_reduce(static_cast<Letter>(rng.below(4)));
      const auto v = walk_from(cover.base(), cover.base().root(), g);
      const auto ax = cover.base().loop_axis(v);
      if (!ax || g.empty()) continue;
      ++found;
      ++checked;
      const bool filled = cover.sampler().status(v, *ax) == CellStatus::Filled;
      if (stabilizer_witness(cover, g, make_letter(*ax, rng.below(2) ? 1 : -1)) != filled) ++failures;
    }
  }
  return {failures == 0, fmt("%zu loops checked, %zu failures", checked, failures)};
}

Outcome c6_coupling() {
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const SweepResult r = run_sweep(2, grid, 10, 40, 606);
  std::size_t violations = 0, compared = 0;
  for (std::size_t a = 0; a < grid.size(); ++a) {
    for (std::size_t b = a + 1; b < grid.size(); ++b) {
      for (std::size_t i = 0; i < r.per_sample[a].size(); ++i) {
        for (std::size_t j = 0; j < r.per_sample[a][i].size(); ++j) {
          ++compared;
          if (r.per_sample[a][i][j] > r.per_sample[b][i][j] + 1e-9) ++violations;
        }
      }
    }
  }
  return {violations == 0, fmt("%zu comparisons, %zu violations", compared, violations)};
}

Outcome c7_sweep() {
  const SweepResult r = run_sweep(2, uniform_grid(20), 10, 200, 707);
  const double p0 = irs_entropy_estimate(ConjClassKn{2}, mu, 10, 1, 0).point_estimate;
  const double triv = irs_entropy_estimate(TrivialSubgroup{}, mu, 10, 1, 0).point_estimate;
  double gap = 0.0;
  for (std::size_t k = 1; k < r.rows.size(); ++k) gap = std::max(gap, std::abs(r.rows[k].estimate - r.rows[k - 1].estimate));
  const double lo = r.rows.front().estimate, hi = r.rows.back().estimate;
  const bool ok = std::abs(lo - p0) <= 1e-9 && std::abs(hi - triv) <= 0.03 && gap <= 0.08;
  return {ok, fmt("p=0 %.6f (conj %.6f) p=1 %.6f (trivial %.6f) max gap %.4f", lo, p0, hi, triv, gap)};
}

Outcome c8_decay() {
  const double h2 = irs_entropy_estimate(ConjClassKn{2}, mu, 10, 1, 0).point_estimate;
  const double h4 = irs_entropy_estimate(ConjClassKn{4}, mu, 10, 1, 0).point_estimate;
  const double h8 = irs_entropy_estimate(ConjClassKn{8}, mu, 10, 1, 0).point_estimate;
  const double ht = irs_entropy_estimate(TrivialSubgroup{}, mu, 10, 1, 0).point_estimate;
  return {h2 > h4 && h4 > h8 && h8 < 0.5 * ht, fmt("h2=%.6f h4=%.6f h8=%.6f trivial/2=%.6f", h2, h4, h8, ht / 2)};
}

Outcome c9_radon_nikodym() {
  double lo = 1e9, hi = -1e9;
  std::size_t count = 0;
  std::uint64_t seed = 900;
  auto sweep = [&](const auto& space) {
    for (const auto& sh : shadows_of_root(space)) {
      for (Letter t : kLetters) {
        const Estimate r = rn_ratio(space, sh.letter, t, 30, 10000, ++seed);
        lo = std::min(lo, r.value);
        hi = std::max(hi, r.value);
        ++count;
      }
    }
  };
  sweep(TrivialSpace{});
  for (std::int64_t n : {1, 2, 3}) {
    for (const auto& r : conjugate_roots(n)) sweep(KnSpace(n, r));
  }
  for (double p : {0.3, 0.7}) {
    for (std::uint64_t s : {1u, 2u}) sweep(CoverSpace(KnSpace(2), CellStatusSampler(s, p)));
    sweep(CoverSpace(KnSpace(3, conjugate_root(3, Axis::B, 1)), CellStatusSampler(3, p)));
  }
  const Estimate r1 = rn_ratio(TrivialSpace{}, Letter::a, Letter::a, 30, 200000, 91);
  const Estimate r2 = rn_ratio(TrivialSpace{}, Letter::a, Letter::A, 30, 200000, 92);
  const bool ok = lo >= 0.23 && hi <= 4.3 && std::abs(r1.value - 1.0 / 3.0) <= 3 * r1.stderr_ &&
                  std::abs(r2.value - 3.0) <= 3 * r2.stderr_;
  return {ok, fmt("%zu ratios in [%.4f, %.4f]; (a,a)=%.4f+-%.4f (a,A)=%.4f+-%.4f", count, lo, hi, r1.value,
                  r1.stderr_, r2.value, r2.stderr_)};
}

Outcome c10_cover_returns() {
  StreamRng rng(1010, {0});
  std::size_t failures = 0;
  double worst = -1e9;
  for (int c = 0; c < 20; ++c) {
    const std::int64_t n = 1 + static_cast<std::int64_t>(rng.below(4));
    const double p = to_unit(rng());
    const std::uint64_t cell_seed = rng(), walk_seed = rng();
    const KnSpace base(n);
    const CoverSpace cover(base, CellStatusSampler(cell_seed, p));
    const Estimate rc = expected_returns(cover, cover.root(), 200, 10000, walk_seed);
    const Estimate rb = expected_returns(base, base.root(), 200, 10000, walk_seed);
    const double slack = rc.value - rb.value - 3 * std::hypot(rc.stderr_, rb.stderr_);
    worst = std::max(worst, slack);
    if (slack > 0) ++failures;
  }
  return {failures == 0, fmt("20 configurations, %zu failures, max excess %.4f", failures, worst)};
}

Outcome c11_exactness() {
  const auto r = return_probabilities(TrivialSpace{}, Word{}, 6);
  const auto d = entropy_increments(TrivialSpace{}, mu, 6);
  double err = 0.0, h = 0.0;
  for (int n = 1; n <= 6; ++n) {
    const FreeWalk w(n);
    err = std::max(err, std::abs(r[n - 1] - w.return_probability()));
    h += d[n - 1];
    err = std::max(err, std::abs(h - w.entropy()));
  }
  return {err <= 1e-12, fmt("max abs error %.3g over n<=6", err)};
}

std::string capture(const std::string& args) {
  const std::string cmd = std::string(COSETWALK_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return "<popen failed>";
  std::string out;
  std::array<char, 4096> buf;
  std::size_t k;
  while ((k = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), k);
  const int st = ::pclose(pipe);
  if (!WIFEXITED(st) || WEXITSTATUS(st) != 0) out += "<exit " + std::to_string(st) + ">";
  return out;
}

Outcome c12_determinism() {
  const std::vector<std::string> commands{
      "entropy --irs perc-kn:2,p=0.5 --nmax 8 --samples 20 --seed 12",
      "entropy --irs perc-kn:3,p=0.3 --method rho --n 20 --walks 2000 --samples 4 --seed 12",
      "entropy --irs conj-kn:2 --method rho --n 20 --walks 5000 --seed 12",
      "sweep --points 5 --nsteps 6 --samples 10 --seed 12",
      "returns --space cover:kn=2,p=0.5,seed=7 --tail 6 --expected --horizon 100 --walks 2000 --seed 12",
      "returns --space zq:a --tail 10 --horizon 200 --walks 2000 --seed 12",
      "hitting --space cover:kn=3,p=0.7,seed=2 --anchor b --n 25 --walks 5000 --seed 12",
      "hitting --space trivial --ratio A --n 25 --walks 5000 --seed 12",
      "ball --space cover:kn=2,p=0.5,seed=12 --radius 4 --format json",
  };
  std::size_t mismatches = 0;
  std::string bad;
  for (const auto& c : commands) {
    const std::string a = capture("--threads 1 " + c), b = capture("--threads 8 " + c), again = capture("--threads 1 " + c);
    const bool failed = a.empty() || a.find("<exit") != std::string::npos;
    if (failed || a != b || a != again) {
      ++mismatches;
      bad += " [" + c + "]";
    }
  }
  return {mismatches == 0, fmt("%zu commands, %zu mismatched", commands.size(), mismatches) + bad};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"trivial IRS increments", c1_trivial_increments},
      {"rho estimator on trivial IRS", c2_rho_trivial},
      {"zero-entropy controls", c3_zero_entropy},
      {"cover endpoint identifications", c4_endpoints},
      {"stabilizer witnesses", c5_stabilizers},
      {"coupled monotonicity", c6_coupling},
      {"entropy path sweep", c7_sweep},
      {"decay along conjugacy classes", c8_decay},
      {"Radon-Nikodym bounds", c9_radon_nikodym},
      {"cover return inequality", c10_cover_returns},
      {"exactness against brute force", c11_exactness},
      {"determinism across threads", c12_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %-32s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(), s);
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
