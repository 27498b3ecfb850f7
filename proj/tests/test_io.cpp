#include <cosetwalk/io.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace cosetwalk;

TEST(ParseSpace, Forms) {
  EXPECT_TRUE(std::holds_alternative<TrivialSpace>(parse_space("trivial")));
  EXPECT_TRUE(std::holds_alternative<FullGroupSpace>(parse_space("full")));
  EXPECT_TRUE(std::holds_alternative<ZQuotientSpace>(parse_space("zq:b")));
  const auto k = std::get<KnSpace>(parse_space("kn:3@a^1"));
  EXPECT_EQ(k.n(), 3);
  EXPECT_EQ(k.root(), SegmentVertex({{Axis::A, 1}}));
  const auto c = std::get<CoverSpace>(parse_space("cover:kn=2,p=0.5,seed=9,root=b^1"));
  EXPECT_EQ(c.sampler().p(), 0.5);
  EXPECT_EQ(c.base().root(), SegmentVertex({{Axis::B, 1}}));
}

TEST(ParseSpace, Errors) {
  for (const char* bad : {"", "kn:", "kn:0", "kn:x", "kn:2@c^1", "kn:2@a^2", "zq:c", "cover:kn=2,p=0.5",
                          "cover:kn=2,p=2,seed=1", "cover:kn=2,p=0.5,seed=1,q=3", "tree"}) {
    EXPECT_THROW(parse_space(bad), PreconditionError) << bad;
  }
}

TEST(ParseIrs, FormsAndErrors) {
  EXPECT_EQ(to_string(parse_irs("conj-kn:4")), "conj-kn:4");
  const auto p = std::get<PercolationKn>(parse_irs("perc-kn:2,p=0.75"));
  EXPECT_EQ(p.n, 2);
  EXPECT_EQ(p.p, 0.75);
  for (const char* bad : {"perc-kn:2", "perc-kn:2,p=1.1", "perc-kn:2,q=0.5", "conj-kn:0", "conj-kn:-1", "zmixx"}) {
    EXPECT_THROW(parse_irs(bad), PreconditionError) << bad;
  }
}

TEST(ParseStart, WalksFromRoot) {
  const KnSpace k(3);
  EXPECT_EQ(parse_start(k, "aa"), SegmentVertex({{Axis::A, 2}}));
  EXPECT_EQ(parse_start(k, "e"), k.root());
  EXPECT_THROW(parse_start(k, "z"), PreconditionError);
}

TEST(BallExport, Dot) {
  const std::string dot = ball_to_dot(ball(KnSpace(2), 1), "kn:2");
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("doublecircle"), std::string::npos);
  EXPECT_NE(dot.find("color=\"red\""), std::string::npos);
  EXPECT_NE(dot.find("color=\"black\""), std::string::npos);
}

TEST(BallExport, Json) {
  const Ball b = ball(TrivialSpace{}, 2);
  const auto j = ball_to_json(b);
  EXPECT_EQ(j["root"], 0);
  EXPECT_EQ(j["vertices"], 17);
  EXPECT_EQ(j["names"][0], "e");
  for (const auto& e : j["edges"]) {
    EXPECT_EQ(e.size(), 4u);
    EXPECT_TRUE(e[2] == "a" || e[2] == "b");
    EXPECT_TRUE(e[3] == 1 || e[3] == -1);
  }
  EXPECT_FALSE(j.contains("loops"));

  std::vector<LoopAnnotation> loops;
  const auto c = ball_to_json(cover_ball(CoverSpace(KnSpace(2), CellStatusSampler(1, 0.5)), 3, loops), &loops);
  ASSERT_TRUE(c.contains("loops"));
  for (const auto& l : c["loops"]) EXPECT_TRUE(l[2] == "open" || l[2] == "filled");
}

TEST(Csv, HeaderAndRows) {
  std::ostringstream os;
  CsvWriter csv(os, "command=test", {"x", "y", "name"});
  csv.row(3, 0.1, std::string("k"));
  EXPECT_EQ(os.str(), "# coset-walk v1\n# command=test\nx,y,name\n3,0.10000000000000001,k\n");
}

TEST(EstimateJson, Fields) {
  const auto e = irs_entropy_estimate(PercolationKn{2, 0.5}, step_measure(2), 4, 3, 11);
  const auto j = estimate_to_json(PercolationKn{2, 0.5}, e);
  EXPECT_EQ(j["irs"]["kind"], "perc-kn");
  EXPECT_EQ(j["irs"]["p"], 0.5);
  EXPECT_EQ(j["samples"], 3);
  EXPECT_EQ(j["seed"], 11);
  EXPECT_EQ(j["increments"].size(), 4u);
  EXPECT_EQ(j["estimate"], e.increments.back());
}

TEST(Sweep, GridValidation) {
  EXPECT_THROW(validate_grid({}), PreconditionError);
  EXPECT_THROW(validate_grid({0.1, 0.1}), PreconditionError);
  EXPECT_THROW(validate_grid({0.5, 0.2}), PreconditionError);
  EXPECT_THROW(validate_grid({-0.1}), PreconditionError);
  EXPECT_NO_THROW(validate_grid({0.0, 0.5, 1.0}));
  const auto g = uniform_grid(4);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g[1], 0.25);
  EXPECT_EQ(g.back(), 1.0);
}

TEST(Sweep, SmallRunCsvAndSvg) {
  const auto r = run_sweep(2, {0.0, 0.5, 1.0}, 6, 6, 3);
  ASSERT_EQ(r.rows.size(), 3u);
  EXPECT_LE(r.rows[0].estimate, r.rows[1].estimate);
  EXPECT_LE(r.rows[1].estimate, r.rows[2].estimate);
  std::ostringstream os;
  write_sweep_csv(os, r);
  const std::string csv = os.str();
  EXPECT_EQ(csv.rfind("# coset-walk v1\n", 0), 0u);
  EXPECT_NE(csv.find("n,p,seed,samples,n_steps,estimate,stderr\n"), std::string::npos);
  const std::string svg = sweep_svg(r);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
}
