#include <doctest.h>

#include <cmath>
#include <limits>

#include "ssr/calibration.hpp"
#include "ssr/normal.hpp"
#include "ssr/rng.hpp"
#include "ssr/simulate.hpp"
#include "test_helpers.hpp"

using namespace ssr;
using ssr_test::kSchizoGamma;
using ssr_test::schizo_design;

TEST_CASE("counter rng is uniform-ish and order independent") {
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) sum += uniform_open01(99, i);
  CHECK(sum / 100000.0 == doctest::Approx(0.5).epsilon(2e-2));
  CHECK(uniform_open01(99, 1234) == uniform_open01(99, 1234));
  CHECK(uniform_open01(99, 1234) != uniform_open01(99, 1235));
  CHECK(uniform_open01(99, 1234) != uniform_open01(100, 1234));
  CHECK(uniform_open01(99, 0) > 0.0);
  CHECK(uniform_open01(99, 0) < 1.0);
}

TEST_CASE("single replicate is reproducible and internally consistent") {
  auto d = schizo_design();
  SimConfig cfg{1000, 42, 1.6, RuleSpec::jt(kSchizoGamma)};
  TrialOutcome a = simulate_trial(cfg, 7, d);
  TrialOutcome b = simulate_trial(cfg, 7, d);
  CHECK(a.z1 == b.z1);
  CHECK(a.n2 == b.n2);
  CHECK(a.z_combined == b.z_combined);
  CHECK(a.rejected == (a.z_combined > d.c_crit));
  CHECK(a.n2 >= 442);
  CHECK(a.n2 <= 884);

  SimConfig bad{0, 42, 1.6, RuleSpec::jt(kSchizoGamma)};
  CHECK_THROWS_AS(simulate_trial(bad, 0, d), std::invalid_argument);
}

TEST_CASE("single replicates aggregate to the batch") {
  auto d = schizo_design();
  SimConfig cfg{500, 99, 1.6, RuleSpec::jt(kSchizoGamma)};
  long rejected = 0;
  long n2_sum = 0;
  for (long i = 0; i < cfg.n_reps; ++i) {
    TrialOutcome t = simulate_trial(cfg, i, d);
    rejected += t.rejected ? 1 : 0;
    n2_sum += t.n2;
  }
  BatchStats b = simulate_batch_stats(cfg, d);
  CHECK(b.reject_rate == doctest::Approx(rejected / 500.0).epsilon(1e-15));
  CHECK(b.mean_n2 == doctest::Approx(n2_sum / 500.0).epsilon(1e-15));
}

TEST_CASE("null rejection rate equals alpha for any rule family") {
  auto d = schizo_design();
  const long reps = 200000;
  for (const RuleSpec& spec :
       {RuleSpec::jt(kSchizoGamma),
        RuleSpec::lr(0.65 * kSchizoGamma, 0.62 * kSchizoGamma),
        RuleSpec::roi(50000.0, 1e8, 0.5, 0.5)}) {
    SimConfig cfg{reps, 11, 0.0, spec};
    BatchStats b = simulate_batch_stats(cfg, d);
    CHECK(std::abs(b.reject_rate - 0.025) <= 3.0 * b.reject_se);
  }
}

TEST_CASE("fixed rule power matches the closed form") {
  auto d = schizo_design();
  // constant cost so large the rule never spends
  SimConfig cfg{200000, 5, 1.6, RuleSpec::jt(1e6)};
  BatchStats b = simulate_batch_stats(cfg, d);
  double closed = fixed_design_power(d.n_min, d);
  CHECK(std::abs(b.reject_rate - closed) <= 3.0 * b.reject_se);
  CHECK(b.mean_n2 == doctest::Approx(442.0));
}

TEST_CASE("monte carlo agrees with quadrature under both hypotheses") {
  auto d = schizo_design();
  RuleSpec jt = RuleSpec::jt(kSchizoGamma);
  OperatingChars quad = operating_chars_quadrature(jt, d);

  SimConfig alt{300000, 17, 1.6, jt};
  BatchStats alt_stats = simulate_batch_stats(alt, d);
  CHECK(std::abs(alt_stats.reject_rate - quad.power) <= 3.0 * alt_stats.reject_se);
  CHECK(std::abs(alt_stats.e_n_alt - quad.e_n_alt) <= 3.0 * alt_stats.se_n_alt);
  CHECK(std::abs(alt_stats.e_n_null - quad.e_n_null) <= 3.0 * alt_stats.se_n_null);
  CHECK(std::abs(alt_stats.mean_n2 - quad.e_n_alt) <= 3.0 * alt_stats.se_n2);

  OperatingChars mc = simulate_batch(alt, d);
  CHECK(mc.method == OcMethod::monte_carlo);
  CHECK(mc.power == alt_stats.reject_rate);
  CHECK(mc.type1 == doctest::Approx(d.alpha));
}

TEST_CASE("monte carlo tracks quadrature for every rule family") {
  auto d = schizo_design();
  DesignParams dc(1.0, 0.29, 140, 280, 420, 0.025);
  struct Case {
    DesignParams design;
    RuleSpec rule;
  };
  std::vector<Case> cases{
      {d, RuleSpec::lr(0.65 * kSchizoGamma, 0.62 * kSchizoGamma)},
      {d, RuleSpec::roi(50000.0, 1e8, 0.5, 0.5)},
      {dc, RuleSpec::cpz(CpzParams{280, 420, 0.8, 0.9})},
  };
  const long reps = 100000;
  for (const auto& cs : cases) {
    OperatingChars quad = operating_chars_quadrature(cs.rule, cs.design);
    for (double theta : {0.0, cs.design.theta_alt}) {
      SimConfig cfg{reps, 23, theta, cs.rule};
      BatchStats b = simulate_batch_stats(cfg, cs.design);
      double expected_rate = theta == 0.0 ? cs.design.alpha : quad.power;
      double rate_se = std::max(b.reject_se, 1e-9);
      CHECK(std::abs(b.reject_rate - expected_rate) <= 3.0 * rate_se);
      CHECK(std::abs(b.e_n_null - quad.e_n_null) <= 3.0 * b.se_n_null + 0.51);
      CHECK(std::abs(b.e_n_alt - quad.e_n_alt) <= 3.0 * b.se_n_alt + 0.51);
    }
  }
}

TEST_CASE("seed determinism is independent of worker count") {
  auto d = schizo_design();
  SimConfig one{60000, 31, 1.6, RuleSpec::lr(0.65 * kSchizoGamma, 0.62 * kSchizoGamma)};
  one.workers = 1;
  SimConfig four = one;
  four.workers = 4;
  BatchStats a = simulate_batch_stats(one, d);
  BatchStats b = simulate_batch_stats(four, d);
  CHECK(a.reject_rate == b.reject_rate);
  CHECK(a.mean_n2 == b.mean_n2);
  CHECK(a.e_n_null == b.e_n_null);
  CHECK(a.e_n_alt == b.e_n_alt);
  CHECK(a.se_n2 == b.se_n2);

  SimConfig other = one;
  other.seed = 32;
  BatchStats c = simulate_batch_stats(other, d);
  CHECK(a.reject_rate != c.reject_rate);
}

TEST_CASE("degenerate one-extra-participant rule still behaves") {
  // n2 fixed barely above n1 via a design whose bounds pin it there
  DesignParams d(7.5, 1.6, 208, 209, 209, 0.025);
  SimConfig cfg{200000, 3, 1.6, RuleSpec::jt(1.0)};
  BatchStats b = simulate_batch_stats(cfg, d);
  double closed = fixed_design_power(209.0, d);
  CHECK(std::abs(b.reject_rate - closed) <= 3.0 * b.reject_se);
}

TEST_CASE("dominance shows up in simulation") {
  auto d = schizo_design();
  const long reps = 400000;
  SimConfig jt_null{reps, 77, 0.0, RuleSpec::jt(kSchizoGamma)};
  SimConfig lr_null{reps, 77, 0.0,
                    RuleSpec::lr(0.65 * kSchizoGamma, 0.62 * kSchizoGamma)};
  BatchStats jt = simulate_batch_stats(jt_null, d);
  BatchStats lr = simulate_batch_stats(lr_null, d);
  double combined_se = std::hypot(jt.se_n2, lr.se_n2);
  CHECK(lr.mean_n2 < jt.mean_n2 - 3.0 * combined_se);
}

TEST_CASE("timing sweep monotonicity") {
  auto d = schizo_design();
  auto entries = timing_sweep({80, 110, 140, 170, 200}, kSchizoGamma,
                              0.65 * kSchizoGamma, 0.62 * kSchizoGamma, d);
  REQUIRE(entries.size() == 5);

  // the likelihood-ratio rule spends later when the interim is earlier
  // (no spending at all counts as an infinite threshold)
  std::vector<double> lr_thresholds;
  for (const auto& e : entries) {
    lr_thresholds.push_back(e.lr_first_spend_z
                                ? *e.lr_first_spend_z
                                : std::numeric_limits<double>::infinity());
  }
  for (std::size_t i = 1; i < lr_thresholds.size(); ++i) {
    CHECK(lr_thresholds[i] < lr_thresholds[i - 1]);
  }
  // at n1 = 80 the lr threshold strictly exceeds jt's
  const auto& first = entries.front();
  REQUIRE(first.jt_first_spend_z.has_value());
  double z_lr80 = first.lr_first_spend_z ? *first.lr_first_spend_z
                                         : std::numeric_limits<double>::infinity();
  CHECK(z_lr80 > *first.jt_first_spend_z);

  CHECK_THROWS_AS(timing_sweep({500}, kSchizoGamma, 1e-3, 1e-3, d),
                  std::invalid_argument);
}
