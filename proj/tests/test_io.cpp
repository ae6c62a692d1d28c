#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lyascreen/io.hpp"
#include "oracles.hpp"

using namespace lyascreen;

namespace {

ScalarField field(const char* src, int n) {
  return ScalarField(Expression::parse(src, n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
}

}  // namespace

TEST(FormatDouble, RoundTripsAndSpecials) {
  for (double v : {0.0, -0.0, 1.0, 0.1, 2.0 / 3.0, 1e-300, -6.02e23, 4.9e-324}) {
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_TRUE(std::isinf(parse_double("inf")));
  EXPECT_TRUE(std::isnan(parse_double("nan")));
  EXPECT_THROW(parse_double("1.5x"), FormatError);
  EXPECT_THROW(parse_double(""), FormatError);
}

TEST(HMapCsv, RoundTripPlanar) {
  const auto f = field(oracle::planar_sextic, 2);
  const auto m = h_map(f, 0.25, RayConfig{});
  std::stringstream ss;
  write_hmap_csv(ss, m);
  const std::string header = ss.str().substr(0, ss.str().find('\n'));
  EXPECT_EQ(header, "dir_1,dir_2,raw_1,raw_2,theta,h,class,z_1,z_2");
  const auto recs = read_hmap_csv(ss);
  ASSERT_EQ(recs.size(), m.rows.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& row = m.rows[i];
    EXPECT_EQ(recs[i].dir, row.point.dir);
    EXPECT_EQ(recs[i].raw, row.point.raw);
    ASSERT_TRUE(recs[i].theta);
    EXPECT_EQ(*recs[i].theta, *row.theta);
    if (row.h.finite()) {
      EXPECT_EQ(recs[i].h, row.h.gamma);
      EXPECT_EQ(recs[i].cls, to_string(row.h.root_class));
      EXPECT_EQ(recs[i].z, row.z);
    } else {
      EXPECT_TRUE(std::isinf(recs[i].h));
      EXPECT_EQ(recs[i].cls, "InfiniteTruncated");
      EXPECT_TRUE(recs[i].z.empty());
    }
  }
}

TEST(HMapCsv, ThreeDimensionalHasNoTheta) {
  const auto f = field("x1^2 + x2^2 + x3^2", 3);
  std::stringstream ss;
  write_hmap_csv(ss, h_map(f, 1.0, RayConfig{}));
  const auto recs = read_hmap_csv(ss);
  ASSERT_EQ(recs.size(), 26u);
  for (const auto& r : recs) EXPECT_FALSE(r.theta);
}

TEST(HMapCsv, RejectsMalformedInput) {
  std::stringstream bad("dir_1,raw_1,h,class,z_1\n1,1,abc,StrictLocalMax,2\n");
  EXPECT_THROW(read_hmap_csv(bad), FormatError);
  std::stringstream short_row("dir_1,raw_1,h,class,z_1\n1,1\n");
  EXPECT_THROW(read_hmap_csv(short_row), FormatError);
}

TEST(LocusCsv, SortedByTheta) {
  const auto f = field(oracle::twisted_u, 2);
  std::stringstream ss;
  write_locus_csv(ss, h_map(f, 0.1, RayConfig{}));
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "theta,z_1,z_2");
  double prev = -1.0;
  int rows = 0;
  while (std::getline(ss, line)) {
    const double theta = parse_double(line.substr(0, line.find(',')));
    EXPECT_GT(theta, prev);
    prev = theta;
    ++rows;
  }
  EXPECT_EQ(rows, 80);
}

TEST(RayCsv, RoundTrip) {
  const auto f = field(oracle::scalar_sextic, 1);
  RayConfig cfg;
  cfg.gamma_max = 4;
  const std::vector<double> d{1.0};
  const auto rows = ray_profile(f, d, cfg, 41);
  std::stringstream ss;
  write_ray_csv(ss, rows);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "gamma,k,kprime,kdoubleprime");
  const auto back = read_ray_csv(ss);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].gamma, rows[i].gamma);
    EXPECT_EQ(back[i].k, rows[i].k);
    EXPECT_EQ(back[i].kprime, rows[i].kprime);
    EXPECT_EQ(back[i].kdoubleprime, rows[i].kdoubleprime);
  }
  // Samples at gamma = 2 and 3 are exact roots of k'.
  EXPECT_EQ(back[20].kprime, 0.0);
  EXPECT_EQ(back[30].kprime, 0.0);
}

TEST(TraceJson, RoundTrip) {
  const auto f = field(oracle::planar_sextic, 2);
  const std::vector<double> d{std::cos(0.3), std::sin(0.3)};
  const auto t = run_gsd(f, d, GsdConfig{}, RayConfig{});
  const auto back = trace_from_json(trace_to_json(t));
  EXPECT_EQ(back.termination, t.termination);
  EXPECT_EQ(back.witness, t.witness);
  EXPECT_EQ(back.witness_grad_norm, t.witness_grad_norm);
  ASSERT_EQ(back.steps.size(), t.steps.size());
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    EXPECT_EQ(back.steps[k].k, t.steps[k].k);
    EXPECT_EQ(back.steps[k].d, t.steps[k].d);
    EXPECT_EQ(back.steps[k].h, t.steps[k].h);
    EXPECT_EQ(back.steps[k].z, t.steps[k].z);
    EXPECT_EQ(back.steps[k].grad_norm, t.steps[k].grad_norm);
    EXPECT_EQ(back.steps[k].beta, t.steps[k].beta);
    EXPECT_EQ(back.steps[k].grad, t.steps[k].grad);
    EXPECT_EQ(back.steps[k].value, t.steps[k].value);
    EXPECT_EQ(back.steps[k].next, t.steps[k].next);
  }
}

TEST(VerdictJson, RoundTrip) {
  Verdict v;
  v.tag = VerdictTag::PassedNecessaryCondition;
  v.evidence = PassEvidence::AllInfinite;
  v.provenance = Provenance{0.05, 2, 100.0, 1e-8, 0, {40, 80}};
  v.warnings = {"first", "second"};
  const std::string text = verdict_to_json(v, "x1^2 + x2^2/4");
  const auto j = nlohmann::json::parse(text);
  EXPECT_EQ(j.at("candidate"), "x1^2 + x2^2/4");
  const auto back = verdict_from_json(text);
  EXPECT_EQ(back.tag, v.tag);
  EXPECT_EQ(back.evidence, v.evidence);
  EXPECT_EQ(back.provenance.delta, 0.05);
  EXPECT_EQ(back.provenance.rounds, 2);
  EXPECT_EQ(back.provenance.grid_steps, v.provenance.grid_steps);
  EXPECT_EQ(back.warnings, v.warnings);

  Verdict r;
  r.tag = VerdictTag::RuledOut;
  r.witness = {2.0000000000000004, -1e-17};
  r.grad_norm = 3e-12;
  const auto rb = verdict_from_json(verdict_to_json(r, "V"));
  EXPECT_EQ(rb.tag, VerdictTag::RuledOut);
  EXPECT_EQ(rb.witness, r.witness);
  EXPECT_EQ(rb.grad_norm, r.grad_norm);

  Verdict i;
  i.reason = "descent terminated Stalled";
  EXPECT_EQ(verdict_from_json(verdict_to_json(i, "V")).reason, i.reason);
}

TEST(VerdictJson, RejectsUnknownTag) {
  EXPECT_THROW(verdict_from_json(R"({"tag": "Maybe"})"), FormatError);
  EXPECT_THROW(verdict_from_json("{"), FormatError);
}
