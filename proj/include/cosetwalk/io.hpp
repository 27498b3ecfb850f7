#pragma once

// Text formats: space and IRS spec strings, ball export (DOT/JSON), result
// JSON, versioned CSV, the percolation sweep and its SVG chart.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "boundary.hpp"
#include "cover.hpp"
#include "entropy.hpp"
#include "errors.hpp"
#include "group.hpp"
#include "spaces.hpp"

namespace cosetwalk {

using AnySpace = std::variant<TrivialSpace, FullGroupSpace, ZQuotientSpace, KnSpace, CoverSpace>;

namespace detail {

template <class T>
T parse_number(std::string_view text, std::string_view what) {
  T value{};
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw PreconditionError("bad " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = text.find(sep, pos);
    out.push_back(text.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

// "a^i" or "b^i" -> conjugate root of K_n.
inline SegmentVertex parse_conjugate(std::int64_t n, std::string_view text) {
  if (text.size() < 3 || (text[0] != 'a' && text[0] != 'b') || text[1] != '^') {
    throw PreconditionError("bad conjugate root '" + std::string(text) + "' (expected a^i or b^i)");
  }
  const Axis ax = text[0] == 'a' ? Axis::A : Axis::B;
  return conjugate_root(n, ax, parse_number<std::int64_t>(text.substr(2), "conjugate index"));
}

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

inline constexpr const char* kSpaceGrammar =
    "trivial | full | zq:a | zq:b | kn:N | kn:N@a^i | kn:N@b^i | cover:kn=N,p=P,seed=S[,root=a^i|b^i]";

inline constexpr const char* kIrsGrammar = "trivial | full | zmix | conj-kn:N | perc-kn:N,p=P";

inline AnySpace parse_space(std::string_view text) {
  if (text == "trivial") return TrivialSpace{};
  if (text == "full") return FullGroupSpace{};
  if (text == "zq:a") return ZQuotientSpace(Axis::A);
  if (text == "zq:b") return ZQuotientSpace(Axis::B);
  if (text.starts_with("kn:")) {
    const std::string_view body = text.substr(3);
    const std::size_t at = body.find('@');
    const auto n = detail::parse_number<std::int64_t>(body.substr(0, at), "K_n parameter");
    if (n < 1) throw PreconditionError("K_n requires n >= 1");
    if (at == std::string_view::npos) return KnSpace(n);
    return KnSpace(n, detail::parse_conjugate(n, body.substr(at + 1)));
  }
  if (text.starts_with("cover:")) {
    std::optional<std::int64_t> n;
    std::optional<double> p;
    std::optional<std::uint64_t> seed;
    std::string_view root;
    for (std::string_view item : detail::split(text.substr(6), ',')) {
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) throw PreconditionError("bad cover field '" + std::string(item) + "'");
      const std::string_view key = item.substr(0, eq), value = item.substr(eq + 1);
      if (key == "kn") {
        n = detail::parse_number<std::int64_t>(value, "K_n parameter");
      } else if (key == "p") {
        p = detail::parse_number<double>(value, "percolation parameter");
      } else if (key == "seed") {
        seed = detail::parse_number<std::uint64_t>(value, "seed");
      } else if (key == "root") {
        root = value;
      } else {
        throw PreconditionError("unknown cover field '" + std::string(key) + "'");
      }
    }
    if (!n || !p || !seed) throw PreconditionError("cover spec needs kn=N, p=P and seed=S");
    if (*n < 1) throw PreconditionError("K_n requires n >= 1");
    const SegmentVertex r = root.empty() ? SegmentVertex{} : detail::parse_conjugate(*n, root);
    return CoverSpace(KnSpace(*n, r), CellStatusSampler(*seed, *p));
  }
  throw PreconditionError("unknown space '" + std::string(text) + "'; grammar: " + kSpaceGrammar);
}

inline IrsSpec parse_irs(std::string_view text) {
  if (text == "trivial") return TrivialSubgroup{};
  if (text == "full") return FullGroup{};
  if (text == "zmix") return ZQuotientMix{};
  if (text.starts_with("conj-kn:")) {
    const auto n = detail::parse_number<std::int64_t>(text.substr(8), "K_n parameter");
    if (n < 1) throw PreconditionError("K_n requires n >= 1");
    return ConjClassKn{n};
  }
  if (text.starts_with("perc-kn:")) {
    const auto parts = detail::split(text.substr(8), ',');
    if (parts.size() != 2 || !parts[1].starts_with("p=")) {
      throw PreconditionError("bad percolation spec '" + std::string(text) + "' (expected perc-kn:N,p=P)");
    }
    const auto n = detail::parse_number<std::int64_t>(parts[0], "K_n parameter");
    const auto p = detail::parse_number<double>(parts[1].substr(2), "percolation parameter");
    if (n < 1) throw PreconditionError("K_n requires n >= 1");
    if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError("percolation parameter must lie in [0,1]");
    return PercolationKn{n, p};
  }
  throw PreconditionError("unknown IRS '" + std::string(text) + "'; grammar: " + kIrsGrammar);
}

// Vertex reached from the root by the letters of `word`.
template <CosetSpace S>
typename S::State parse_start(const S& space, std::string_view word) {
  return walk_from(space, space.root(), parse_word(word));
}

// ---------------------------------------------------------------------------
// Ball export

inline std::string ball_to_dot(const Ball& b, const std::string& name) {
  std::ostringstream os;
  os << "digraph \"" << name << "\" {\n";
  os << "  node [shape=circle, fontsize=10];\n";
  for (std::size_t v = 0; v < b.vertices(); ++v) {
    os << "  " << v << " [label=\"" << b.names[v] << "\"" << (v == 0 ? ", shape=doublecircle" : "") << "];\n";
  }
  for (const BallEdge& e : b.edges) {
    if (sign(e.letter) < 0) continue;
    const char l = axis_char(axis(e.letter));
    os << "  " << e.src << " -> " << e.dst << " [label=\"" << l << "\", color=\"" << (l == 'a' ? "black" : "red")
       << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

struct LoopAnnotation {
  VertexId vertex;
  Axis axis;
  CellStatus status;
};

inline nlohmann::ordered_json ball_to_json(const Ball& b, const std::vector<LoopAnnotation>* loops = nullptr) {
  nlohmann::ordered_json j;
  j["root"] = 0;
  j["vertices"] = b.vertices();
  j["radius"] = b.radius;
  j["names"] = b.names;
  auto edges = nlohmann::ordered_json::array();
  for (const BallEdge& e : b.edges) {
    edges.push_back({e.src, e.dst, std::string(1, axis_char(axis(e.letter))), sign(e.letter)});
  }
  j["edges"] = std::move(edges);
  if (loops) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& l : *loops) arr.push_back({l.vertex, std::string(1, axis_char(l.axis)), to_string(l.status)});
    j["loops"] = std::move(arr);
  }
  return j;
}

// Ball of a cover together with the status of every base loop under it.
template <CellSampler Sampler>
Ball cover_ball(const BasicCoverSpace<Sampler>& cover, std::size_t radius, std::vector<LoopAnnotation>& loops) {
  loops.clear();
  return ball(cover, radius, [&](VertexId v, const CoverVertex& s) {
    if (auto ax = cover.base().loop_axis(s.base)) loops.push_back({v, *ax, cover.sampler().status(s.base, *ax)});
  });
}

// ---------------------------------------------------------------------------
// Results

inline nlohmann::ordered_json irs_to_json(const IrsSpec& irs) {
  nlohmann::ordered_json j;
  j["spec"] = to_string(irs);
  if (const auto* c = std::get_if<ConjClassKn>(&irs)) {
    j["kind"] = "conj-kn";
    j["n"] = c->n;
  } else if (const auto* c = std::get_if<PercolationKn>(&irs)) {
    j["kind"] = "perc-kn";
    j["n"] = c->n;
    j["p"] = c->p;
  } else {
    j["kind"] = to_string(irs);
  }
  return j;
}

inline nlohmann::ordered_json estimate_to_json(const IrsSpec& irs, const EntropyEstimate& e) {
  nlohmann::ordered_json j;
  j["irs"] = irs_to_json(irs);
  j["n_max"] = e.n_max;
  j["samples"] = e.samples;
  j["seed"] = e.seed;
  j["exact"] = e.exact;
  j["increments"] = e.increments;
  j["stderr"] = e.stderr_;
  j["estimate"] = e.point_estimate;
  return j;
}

// CSV with the versioned header line and a parameter comment line.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const std::string& params, const std::vector<std::string>& columns) : os_(os) {
    os_ << "# coset-walk v1\n# " << params << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
  }

  template <class... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(fields), first = false), ...);
    os_ << "\n";
  }

 private:
  static std::string cell(double x) { return detail::format_double(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  template <class T>
    requires std::is_integral_v<T>
  static std::string cell(T x) {
    return std::to_string(x);
  }

  std::ostream& os_;
};

inline const std::vector<std::string> kDiagnosticColumns{"space", "start", "quantity", "n",    "horizon",
                                                         "walks", "seed",  "estimate", "stderr"};

// ---------------------------------------------------------------------------
// Sweep over p with one shared master seed (shared-uniform coupling).

struct SweepRow {
  std::int64_t n;
  double p;
  std::uint64_t seed;
  std::size_t samples;
  int n_steps;
  double estimate;
  double stderr_;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  // per_sample[k][i][j]: increment j of sample i at grid point k.
  std::vector<std::vector<std::vector<double>>> per_sample;
};

inline void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw PreconditionError("p-grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) throw PreconditionError("p-grid values must lie in [0,1]");
    if (k > 0 && !(grid[k] > grid[k - 1])) throw PreconditionError("p-grid must be strictly increasing");
  }
}

// k+1 evenly spaced points 0, 1/k, ..., 1.
inline std::vector<double> uniform_grid(std::size_t k) {
  std::vector<double> out;
  for (std::size_t i = 0; i <= k; ++i) out.push_back(static_cast<double>(i) / static_cast<double>(k));
  return out;
}

inline SweepResult run_sweep(std::int64_t n, const std::vector<double>& grid, int n_steps, std::size_t samples,
                             std::uint64_t seed, unsigned threads = 1) {
  validate_grid(grid);
  const StepMeasure mu = step_measure(2);
  SweepResult out;
  for (double p : grid) {
    auto est = irs_entropy_estimate(PercolationKn{n, p}, mu, n_steps, samples, seed, threads);
    out.rows.push_back({n, p, seed, samples, n_steps, est.point_estimate, est.stderr_.back()});
    out.per_sample.push_back(std::move(est.per_sample));
  }
  return out;
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  std::string params = "command=sweep";
  if (!r.rows.empty()) {
    const auto& f = r.rows.front();
    params += " n=" + std::to_string(f.n) + " n_steps=" + std::to_string(f.n_steps) +
              " samples=" + std::to_string(f.samples) + " seed=" + std::to_string(f.seed);
  }
  CsvWriter csv(os, params, {"n", "p", "seed", "samples", "n_steps", "estimate", "stderr"});
  for (const auto& row : r.rows) csv.row(row.n, row.p, row.seed, row.samples, row.n_steps, row.estimate, row.stderr_);
}

// Self-contained line chart of estimate vs p with a +-stderr band.
inline std::string sweep_svg(const SweepResult& r, double reference = hmax_reference()) {
  constexpr double W = 640, H = 400, L = 60, R = 20, T = 30, B = 50;
  double ymax = reference;
  for (const auto& row : r.rows) ymax = std::max(ymax, row.estimate + row.stderr_);
  ymax = std::ceil(ymax * 10.0) / 10.0;
  auto x = [&](double p) { return L + p * (W - L - R); };
  auto y = [&](double v) { return H - B - v / ymax * (H - T - B); };
  char buf[160];
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << " " << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, H - B,
                W - R, H - B);
  os << buf;
  std::snprintf(buf, sizeof buf, "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n", L, T, L, H - B);
  os << buf;
  for (int i = 0; i <= 4; ++i) {
    const double p = i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%.1f\" y=\"%g\" text-anchor=\"middle\">%.2f</text>\n", x(p),
                  H - B + 18, p);
    os << buf;
    const double v = ymax * i / 4.0;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%.1f\" text-anchor=\"end\">%.2f</text>\n", L - 6, y(v) + 4, v);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">p</text>\n", (L + W - R) / 2,
                H - 12);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"16\" y=\"%g\" text-anchor=\"middle\" transform=\"rotate(-90 16 %g)\">entropy (nats)</text>\n",
                (T + H - B) / 2, (T + H - B) / 2);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%.1f\" x2=\"%g\" y2=\"%.1f\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n", L,
                y(reference), W - R, y(reference));
  os << buf;
  if (!r.rows.empty()) {
    os << "<polygon fill=\"steelblue\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
    for (const auto& row : r.rows) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x(row.p), y(row.estimate + row.stderr_));
      os << buf;
    }
    for (auto it = r.rows.rbegin(); it != r.rows.rend(); ++it) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x(it->p), y(std::max(0.0, it->estimate - it->stderr_)));
      os << buf;
    }
    os << "\"/>\n<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& row : r.rows) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", x(row.p), y(row.estimate));
      os << buf;
    }
    os << "\"/>\n";
    for (const auto& row : r.rows) {
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"steelblue\"/>\n", x(row.p),
                    y(row.estimate));
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\">n = %lld, %zu samples, %d steps</text>\n", L + 8, T - 10,
                  static_cast<long long>(r.rows.front().n), r.rows.front().samples, r.rows.front().n_steps);
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace cosetwalk
