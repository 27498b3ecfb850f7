// cosetwalk: command-line front end for the coset-walk library.

#include <cosetwalk.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace cw = cosetwalk;

namespace {

enum ExitCode { kOk = 0, kVerifyFailed = 1, kBadArgs = 2, kBudget = 3 };

struct Common {
  unsigned threads = 1;
  std::string out;
};

std::uint64_t resolve_seed(std::optional<std::uint64_t>& seed) {
  if (!seed) {
    std::random_device rd;
    seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed=" << *seed << " (generated)\n";
  }
  return *seed;
}

void emit(const Common& c, const std::string& text) {
  if (c.out.empty() || c.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + c.out + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write to " + c.out + " failed");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  for (auto part : cw::detail::split(text, ',')) grid.push_back(cw::detail::parse_number<double>(part, "p-grid value"));
  return grid;
}

cw::Letter parse_letter(const std::string& text) {
  if (text.size() != 1) throw cw::PreconditionError("expected a single letter among a, A, b, B");
  return cw::letter_from_char(text[0]);
}

// Expands `--config file.json` into ordinary flags placed right after the
// subcommand name, so flags given on the command line (which come later) win.
std::vector<std::string> expand_config(int argc, char** argv, const std::vector<std::string>& subcommands) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw cw::PreconditionError("cannot read config file " + path);
  nlohmann::json cfg;
  try {
    cfg = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw cw::PreconditionError("config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) throw cw::PreconditionError("config " + path + " must hold a JSON object");

  auto sub = std::find_if(args.begin(), args.end(), [&](const std::string& a) {
    return std::find(subcommands.begin(), subcommands.end(), a) != subcommands.end();
  });
  if (sub == args.end()) {
    if (!cfg.contains("command")) throw cw::PreconditionError("no subcommand given on the command line or in config");
    sub = args.insert(args.end(), cfg["command"].get<std::string>());
  }
  std::vector<std::string> flags;
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command") continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) flags.push_back("--" + key);
    } else if (value.is_string()) {
      flags.push_back("--" + key);
      flags.push_back(value.get<std::string>());
    } else if (value.is_number_integer() || value.is_number_unsigned()) {
      flags.push_back("--" + key);
      flags.push_back(value.dump());
    } else if (value.is_number_float()) {
      flags.push_back("--" + key);
      flags.push_back(cw::detail::format_double(value.get<double>()));
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& x : value) {
        if (!joined.empty()) joined += ",";
        joined += x.is_string() ? x.get<std::string>() : (x.is_number_float() ? cw::detail::format_double(x.get<double>()) : x.dump());
      }
      flags.push_back("--" + key);
      flags.push_back(joined);
    } else {
      throw cw::PreconditionError("config key '" + key + "' has an unsupported type");
    }
  }
  args.insert(sub + 1, flags.begin(), flags.end());
  return args;
}

// ---------------------------------------------------------------------------

struct BallArgs {
  std::string space;
  std::size_t radius = 2;
  std::string format = "json";
};

std::string run_ball(const BallArgs& a) {
  const cw::AnySpace any = cw::parse_space(a.space);
  return std::visit(
      [&](const auto& space) -> std::string {
        using S = std::decay_t<decltype(space)>;
        std::vector<cw::LoopAnnotation> loops;
        cw::Ball b;
        if constexpr (std::is_same_v<S, cw::CoverSpace>) {
          b = cw::cover_ball(space, a.radius, loops);
        } else {
          b = cw::ball(space, a.radius);
        }
        if (a.format == "dot") return cw::ball_to_dot(b, a.space);
        auto j = cw::ball_to_json(b, std::is_same_v<S, cw::CoverSpace> ? &loops : nullptr);
        j["space"] = a.space;
        j["treelike"] = cw::is_treelike(b);
        return j.dump(2) + "\n";
      },
      any);
}

struct EntropyArgs {
  std::string irs;
  int n_max = 12;
  std::size_t samples = 200;
  std::optional<std::uint64_t> seed;
  std::string method = "increments";
  int steps = 30;
  std::size_t walks = 10000;
};

std::string run_entropy(EntropyArgs& a, unsigned threads) {
  const cw::IrsSpec irs = cw::parse_irs(a.irs);
  const std::uint64_t seed = resolve_seed(a.seed);
  const cw::StepMeasure mu = cw::step_measure(2);
  if (a.method == "rho") {
    const cw::Estimate e = cw::rho_entropy_estimate(irs, mu, a.steps, a.walks, a.samples, seed, threads);
    nlohmann::ordered_json j;
    j["irs"] = cw::irs_to_json(irs);
    j["method"] = "rho";
    j["n"] = a.steps;
    j["walks"] = a.walks;
    j["samples"] = cw::is_atomic(irs) ? 1 : a.samples;
    j["seed"] = seed;
    j["estimate"] = e.value;
    j["stderr"] = e.stderr_;
    return j.dump(2) + "\n";
  }
  const auto e = cw::irs_entropy_estimate(irs, mu, a.n_max, a.samples, seed, threads);
  auto j = cw::estimate_to_json(irs, e);
  j["method"] = "increments";
  return j.dump(2) + "\n";
}

struct SweepArgs {
  std::int64_t n = 2;
  std::string grid;
  std::size_t points = 21;
  int steps = 10;
  std::size_t samples = 200;
  std::optional<std::uint64_t> seed;
  std::string svg;
};

std::string run_sweep(SweepArgs& a, unsigned threads) {
  if (a.grid.empty() && a.points < 2) throw cw::PreconditionError("--points must be >= 2");
  const std::vector<double> grid = a.grid.empty() ? cw::uniform_grid(a.points - 1) : parse_grid(a.grid);
  const std::uint64_t seed = resolve_seed(a.seed);
  const cw::SweepResult r = cw::run_sweep(a.n, grid, a.steps, a.samples, seed, threads);
  if (!a.svg.empty()) {
    std::ofstream f(a.svg, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + a.svg + " for writing");
    f << cw::sweep_svg(r);
  }
  std::ostringstream os;
  cw::write_sweep_csv(os, r);
  return os.str();
}

struct ReturnsArgs {
  std::string space;
  std::string start = "e";
  int exact = 0;
  std::optional<int> tail;
  bool expected = false;
  int horizon = 200;
  std::size_t walks = 10000;
  std::optional<std::uint64_t> seed;
};

std::string run_returns(ReturnsArgs& a, unsigned threads) {
  if (a.exact <= 0 && !a.tail && !a.expected) a.exact = 6;
  const bool stochastic = a.tail || a.expected;
  const std::uint64_t seed = stochastic ? resolve_seed(a.seed) : a.seed.value_or(0);
  std::ostringstream os;
  std::string params = "command=returns space=" + a.space + " start=" + a.start;
  if (stochastic) params += " seed=" + std::to_string(seed);
  cw::CsvWriter csv(os, params, cw::kDiagnosticColumns);
  const std::string seed_cell = stochastic ? std::to_string(seed) : "-";
  std::visit(
      [&](const auto& space) {
        const auto start = cw::parse_start(space, a.start);
        if (a.exact > 0) {
          const auto r = cw::return_probabilities(space, start, a.exact);
          for (int m = 1; m <= a.exact; ++m) csv.row(a.space, a.start, "R_exact", m, m, 0, "-", r[m - 1], 0.0);
        }
        if (a.tail) {
          const auto t = cw::tail_return_estimate(space, start, *a.tail, a.horizon, a.walks, seed, threads);
          csv.row(a.space, a.start, "tail_return_lower", t.n, t.horizon, a.walks, seed_cell, t.revisit.value,
                  t.revisit.stderr_);
          if (t.exact_window_bound) {
            csv.row(a.space, a.start, "tail_exact_window_bound", t.n, std::min(t.horizon, cw::kExactTailLimit), 0, "-",
                    *t.exact_window_bound, 0.0);
          }
        }
        if (a.expected) {
          const auto e = cw::expected_returns(space, start, a.horizon, a.walks, cw::stream_key(seed, {1}), threads);
          csv.row(a.space, a.start, "expected_returns", 0, a.horizon, a.walks, seed_cell, e.value, e.stderr_);
        }
      },
      cw::parse_space(a.space));
  return os.str();
}

struct HittingArgs {
  std::string space;
  std::string start = "e";
  std::string anchor = "a";
  std::string ratio;
  int steps = 30;
  std::size_t walks = 100000;
  std::optional<std::uint64_t> seed;
};

std::string run_hitting(HittingArgs& a, unsigned threads) {
  const std::uint64_t seed = resolve_seed(a.seed);
  const cw::Letter s = parse_letter(a.anchor);
  std::ostringstream os;
  cw::CsvWriter csv(os, "command=hitting space=" + a.space + " seed=" + std::to_string(seed), cw::kDiagnosticColumns);
  std::visit(
      [&](const auto& space) {
        if (!a.ratio.empty()) {
          const cw::Letter t = parse_letter(a.ratio);
          const cw::Estimate r = cw::rn_ratio(space, s, t, a.steps, a.walks, seed, threads);
          csv.row(a.space, "e", "rn_ratio:s=" + a.anchor + ",t=" + a.ratio, a.steps, a.steps, a.walks, seed, r.value,
                  r.stderr_);
          return;
        }
        const auto sh = cw::shadow_of(space, s);
        if (!sh) throw cw::PreconditionError("no shadow in direction " + a.anchor + " (loop at the root)");
        const auto start = cw::parse_start(space, a.start);
        const cw::Estimate h = cw::hitting_probability(space, start, *sh, a.steps, a.walks, seed, threads);
        csv.row(a.space, a.start, "hitting:" + a.anchor, a.steps, a.steps, a.walks, seed, h.value, h.stderr_);
      },
      cw::parse_space(a.space));
  return os.str();
}

struct VerifyArgs {
  std::string fixture;
  std::uint64_t seed = 1;
};

int run_verify(const VerifyArgs& a, const Common& c) {
  cw::VerifyOptions opt;
  opt.seed = a.seed;
  if (a.fixture == "corrupt-automaton") {
    opt.corrupt_automaton = true;
  } else if (a.fixture == "p-dependent-hash") {
    opt.p_dependent_hash = true;
  } else if (!a.fixture.empty()) {
    throw cw::PreconditionError("unknown fixture '" + a.fixture + "'");
  }
  const auto results = cw::run_verify(opt);
  nlohmann::ordered_json j;
  j["fixture"] = a.fixture.empty() ? "none" : a.fixture;
  auto arr = nlohmann::ordered_json::array();
  bool ok = true;
  for (const auto& r : results) {
    arr.push_back({{"check", r.name}, {"pass", r.passed}, {"detail", r.detail}});
    std::cerr << (r.passed ? "PASS " : "FAIL ") << r.name << (r.detail.empty() ? "" : ": " + r.detail) << "\n";
    ok = ok && r.passed;
  }
  j["checks"] = std::move(arr);
  j["passed"] = ok;
  emit(c, j.dump(2) + "\n");
  return ok ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks on coset spaces of the rank-2 free group: entropy, boundary hitting, percolated covers"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.footer(std::string("Space specs: ") + cw::kSpaceGrammar + "\nIRS specs:   " + cw::kIrsGrammar +
             "\nWords use a, A (= a^-1), b, B (= b^-1); the empty word is e.\n"
             "--config FILE.json supplies any subcommand flag as a JSON key.\n"
             "Exit codes: 0 ok, 1 verification failure, 2 bad arguments, 3 budget exceeded (COSETWALK_BUDGET).");

  Common common;
  app.add_option("--threads", common.threads, "Worker threads; output does not depend on it")
      ->check(CLI::Range(1U, 1024U));
  app.add_option("--out,-o", common.out, "Output file (default stdout)");

  BallArgs ball_args;
  auto* ball = app.add_subcommand("ball", "Export the ball around the root as DOT or JSON");
  ball->add_option("--space", ball_args.space, "Space spec")->required();
  ball->add_option("--radius", ball_args.radius, "Ball radius")->capture_default_str();
  ball->add_option("--format", ball_args.format)->check(CLI::IsMember({"dot", "json"}))->capture_default_str();

  EntropyArgs ent;
  auto* entropy = app.add_subcommand("entropy", "Entropy estimate of an IRS (JSON)");
  entropy->add_option("--irs", ent.irs, "IRS spec")->required();
  entropy->add_option("--nmax", ent.n_max, "Number of increments (increments method)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  entropy->add_option("--samples", ent.samples, "IRS samples (percolation only)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  entropy->add_option("--seed", ent.seed, "Master seed (generated and printed when absent)");
  entropy->add_option("--method", ent.method)->check(CLI::IsMember({"increments", "rho"}))->capture_default_str();
  entropy->add_option("--n", ent.steps, "Walk horizon (rho method)")->check(CLI::PositiveNumber)->capture_default_str();
  entropy->add_option("--walks", ent.walks, "Walks per start (rho method)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Coupled percolation sweep over p (CSV, optional SVG)");
  sweep->add_option("--n", sw.n, "K_n parameter")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--p-grid", sw.grid, "Comma-separated strictly increasing p values");
  sweep->add_option("--points", sw.points, "Evenly spaced grid size when --p-grid is absent")->capture_default_str();
  sweep->add_option("--nsteps", sw.steps, "Increment index reported")->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--samples", sw.samples)->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_option("--seed", sw.seed, "Master seed shared by every p");
  sweep->add_option("--svg", sw.svg, "Also write a line chart to this file");

  ReturnsArgs ret;
  auto* returns = app.add_subcommand("returns", "Return probabilities and return-time diagnostics (CSV)");
  returns->add_option("--space", ret.space, "Space spec")->required();
  returns->add_option("--start", ret.start, "Start vertex as a word from the root")->capture_default_str();
  returns->add_option("--exact", ret.exact, "Exact R_1..R_M by DP");
  returns->add_option("--tail", ret.tail, "Monte Carlo lower bound on R_{>=N}");
  returns->add_flag("--expected", ret.expected, "Monte Carlo expected number of returns");
  returns->add_option("--horizon", ret.horizon)->check(CLI::PositiveNumber)->capture_default_str();
  returns->add_option("--walks", ret.walks)->check(CLI::PositiveNumber)->capture_default_str();
  returns->add_option("--seed", ret.seed);

  HittingArgs hit;
  auto* hitting = app.add_subcommand("hitting", "Shadow hitting probabilities and Radon-Nikodym ratios (CSV)");
  hitting->add_option("--space", hit.space, "Space spec")->required();
  hitting->add_option("--start", hit.start, "Start vertex as a word from the root")->capture_default_str();
  hitting->add_option("--anchor", hit.anchor, "Shadow direction: a, A, b or B")->capture_default_str();
  hitting->add_option("--ratio", hit.ratio, "Letter t: report nu_{t^-1}(B_anchor) / nu_e(B_anchor) instead");
  hitting->add_option("--n", hit.steps, "Walk length")->check(CLI::PositiveNumber)->capture_default_str();
  hitting->add_option("--walks", hit.walks)->check(CLI::PositiveNumber)->capture_default_str();
  hitting->add_option("--seed", hit.seed);

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run the invariant suite (JSON report, exit 1 on failure)");
  verify->add_option("--fixture", ver.fixture, "Negative control")
      ->check(CLI::IsMember({"corrupt-automaton", "p-dependent-hash"}));
  verify->add_option("--seed", ver.seed)->capture_default_str();

  std::vector<std::string> args;
  try {
    args = expand_config(argc, argv, {"ball", "entropy", "sweep", "returns", "hitting", "verify"});
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadArgs;
  } catch (const cw::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  }

  try {
    if (*ball) emit(common, run_ball(ball_args));
    if (*entropy) emit(common, run_entropy(ent, common.threads));
    if (*sweep) emit(common, run_sweep(sw, common.threads));
    if (*returns) emit(common, run_returns(ret, common.threads));
    if (*hitting) emit(common, run_hitting(hit, common.threads));
    if (*verify) return run_verify(ver, common);
  } catch (const cw::PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  } catch (const cw::BudgetExceeded& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBudget;
  } catch (const cw::DegenerateRatio& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kVerifyFailed;
  }
  return kOk;
}
