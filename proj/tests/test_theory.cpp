#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "selfalign/errors.hpp"
#include "selfalign/kernels.hpp"
#include "selfalign/rng.hpp"
#include "selfalign/theory.hpp"
#include "testutil.hpp"

using namespace selfalign;

TEST_SUITE("theory") {

TEST_CASE("sample_sphere draws unit vectors deterministically") {
  Rng r1(7), r2(7), r3(8);
  Mat a = theory::sample_sphere(8, 200, r1);
  Mat b = theory::sample_sphere(8, 200, r2);
  Mat c = theory::sample_sphere(8, 200, r3);
  CHECK(a == b);
  CHECK(a != c);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    CHECK(std::fabs(kernels::nrm2(a.row(i), 8) - 1.0) <= 1e-9);
  }
}

TEST_CASE("sample_sphere coordinates are centered") {
  Rng rng(11);
  const std::size_t n = 100000, dim = 8;
  Mat s = theory::sample_sphere(dim, n, rng);
  // Each coordinate has mean 0 and variance 1/dim on the sphere.
  for (std::size_t j = 0; j < dim; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += s(i, j);
    double mean = sum / n;
    double se = std::sqrt(1.0 / dim / n);
    CHECK(std::fabs(mean) <= 4.0 * se);
  }
}

TEST_CASE("sandwich check passes at reduced size") {
  theory::SandwichConfig cfg;
  cfg.taus = {0.08, 1.0};
  cfg.dims = {4, 16};
  cfg.ms = {1, 32};
  cfg.instances = 500;
  auto rep = theory::check_sandwich(cfg);
  CHECK(rep.pass);
  CHECK(rep.rows.size() == 2 * 2 * 2);
  for (const auto& row : rep.rows) {
    CHECK(row.check == "sandwich");
    CHECK(row.pass);
    CHECK(row.estimate <= cfg.slack);
  }
}

TEST_CASE("decay check passes at reduced size and the bound shrinks") {
  theory::DecayConfig cfg;
  cfg.lambdas = {1.0};
  cfg.ms = {16, 128, 1024};
  cfg.trials = 400;
  cfg.ref_samples = 400000;
  auto rep = theory::check_limit_decay(cfg);
  CHECK(rep.pass);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].bound > rep.rows[1].bound);
  CHECK(rep.rows[1].bound > rep.rows[2].bound);
  CHECK(rep.rows[0].estimate > rep.rows[2].estimate);
  for (const auto& row : rep.rows) {
    CHECK(row.check == "limit_decay");
    CHECK(row.estimate <= row.bound + 3.0 * row.std_err);
  }
}

TEST_CASE("decay bound arithmetic") {
  // Independent evaluation of the envelope at m = 64, lambda = 1, tau = 1.
  theory::DecayConfig cfg;
  cfg.lambdas = {1.0, 2.0};
  cfg.ms = {64};
  cfg.trials = 30;
  cfg.ref_samples = 1000;
  auto rep = theory::check_limit_decay(cfg);
  REQUIRE(rep.rows.size() == 2);

  const double e1 = std::exp(1.0);
  double first_term = (1.0 / 64.0) * std::exp(2.0);
  double second_term =
      1.25 * std::pow(64.0, -2.0 / 3.0) * e1 * (e1 - std::exp(-1.0));
  CHECK(rep.rows[0].bound ==
        doctest::Approx(first_term + second_term).epsilon(1e-12));
  // Doubling lambda doubles only the first (pool contamination) term.
  CHECK(rep.rows[1].bound ==
        doctest::Approx(2.0 * first_term + second_term).epsilon(1e-12));
  CHECK(rep.rows[0].lambda == 1.0);
  CHECK(rep.rows[1].lambda == 2.0);
}

TEST_CASE("gap check passes at reduced size") {
  theory::GapConfig cfg;
  cfg.ms = {16, 256};
  cfg.trials = 400;
  cfg.pointwise_samples = 2000;
  cfg.seed = 39;  // the decreasing-sweep demonstration needs a pinned seed
  auto rep = theory::check_negative_source_gap(cfg);
  CHECK(rep.pass);
  REQUIRE(rep.rows.size() == 3);  // two sweep rows plus the pointwise row
  CHECK(rep.rows[0].m == 16);
  CHECK(rep.rows[1].m == 256);
  CHECK(rep.rows[1].estimate <= 3.0 * rep.rows[1].std_err);
  const auto& pw = rep.rows[2];
  CHECK(pw.check == "pointwise");
  CHECK(pw.bound == doctest::Approx(2.0 / cfg.tau));
  CHECK(pw.estimate < pw.bound);
}

TEST_CASE("configuration invariants are enforced") {
  theory::SandwichConfig s;
  s.instances = 29;
  CHECK_THROWS_AS(theory::check_sandwich(s), ConfigError);

  theory::DecayConfig d1;
  d1.trials = 10;
  CHECK_THROWS_AS(theory::check_limit_decay(d1), ConfigError);
  theory::DecayConfig d2;
  d2.ms = {64, 16};
  CHECK_THROWS_AS(theory::check_limit_decay(d2), ConfigError);
  theory::DecayConfig d3;
  d3.ms = {16, 16, 64};
  CHECK_THROWS_AS(theory::check_limit_decay(d3), ConfigError);

  theory::GapConfig g1;
  g1.trials = 5;
  CHECK_THROWS_AS(theory::check_negative_source_gap(g1), ConfigError);
  theory::GapConfig g2;
  g2.ms = {256, 16};
  CHECK_THROWS_AS(theory::check_negative_source_gap(g2), ConfigError);
}

TEST_CASE("report tsv carries the required columns") {
  theory::CheckReport rep;
  theory::CheckRow row;
  row.check = "sandwich";
  row.tau = 0.08;
  row.dim = 4;
  row.lambda = 1.0;
  row.m = 16;
  row.estimate = 0.0;
  row.std_err = 0.001;
  row.bound = 1e-9;
  row.decreased = true;
  row.pass = true;
  rep.rows.push_back(row);
  rep.pass = true;

  testutil::TempDir tmp;
  auto path = tmp.file("report.tsv");
  theory::write_report_tsv(path, rep);
  std::string text = testutil::read_file(path);
  CHECK(text.find("check\ttau\tdim\tlambda\tm\testimate\tstd_err\tbound\t"
                  "decreased\tpass") != std::string::npos);
  CHECK(text.find("sandwich\t") != std::string::npos);
  CHECK(text.find("\t16\t") != std::string::npos);
}

}  // TEST_SUITE
