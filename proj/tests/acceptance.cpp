// Acceptance suite: one line per criterion, computed values alongside the
// stated tolerances. Exit status is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "ssr/audit.hpp"
#include "ssr/calibration.hpp"
#include "ssr/conditional_power.hpp"
#include "ssr/rule.hpp"
#include "ssr/simulate.hpp"

using namespace ssr;

namespace {
int g_failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string name, double time_budget_s)
      : number_(number), name_(std::move(name)), budget_(time_budget_s),
        start_(std::chrono::steady_clock::now()) {}

  void check(bool ok, const std::string& detail) {
    if (!ok) {
      failed_ = true;
      details_ += (details_.empty() ? "" : "; ") + detail;
    }
  }

  void note(const std::string& text) {
    notes_ += (notes_.empty() ? "" : "; ") + text;
  }

  ~Criterion() {
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                start_)
                      .count();
    if (secs > budget_) {
      failed_ = true;
      char buf[128];
      std::snprintf(buf, sizeof(buf), "runtime %.1f s exceeds budget %.0f s", secs,
                    budget_);
      details_ += (details_.empty() ? "" : "; ") + std::string(buf);
    }
    std::printf("criterion %2d (%s): %s (%.1f s)%s%s%s%s\n", number_, name_.c_str(),
                failed_ ? "FAIL" : "PASS", secs, notes_.empty() ? "" : " [",
                notes_.c_str(), notes_.empty() ? "" : "]",
                details_.empty() ? "" : ("; " + details_).c_str());
    std::fflush(stdout);
    if (failed_) ++g_failures;
  }

 private:
  int number_;
  std::string name_;
  double budget_;
  std::chrono::steady_clock::time_point start_;
  bool failed_ = false;
  std::string details_;
  std::string notes_;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

DesignParams schizo() { return DesignParams(7.5, 1.6, 208, 442, 884, 0.025); }
DesignParams cpz_d() { return DesignParams(1.0, 0.29, 140, 280, 420, 0.025); }
constexpr double kGamma = 0.25 / (4.0 * 7.5 * 7.5);

void criterion_1() {
  Criterion c(1, "cpz zone geometry", 1.0);
  auto d = cpz_d();
  double lower = solve_z1_for_cp(420, 0.8, d);
  double turning = solve_z1_for_cp(420, 0.9, d);
  double upper = solve_z1_for_cp(280, 0.9, d);
  c.note(fmt("edges %.4f / %.4f, turning %.4f", lower, upper, turning));
  c.check(std::abs(lower - 1.187) <= 0.002, fmt("lower edge %.4f vs 1.187", lower));
  c.check(std::abs(turning - 1.627) <= 0.002, fmt("turning %.4f vs 1.627", turning));
  c.check(std::abs(upper - 2.338) <= 0.002, fmt("upper edge %.4f vs 2.338", upper));
}

void criterion_2() {
  Criterion c(2, "concavity threshold", 1.0);
  auto d = cpz_d();
  auto cert = concavity_certificate(1.0, d, 280, 420);
  c.note(fmt("z_threshold %.5f", cert.z_threshold));
  c.check(std::abs(cert.z_threshold - 0.4733) <= 0.002,
          fmt("z_threshold %.5f vs 0.4733 +- 0.002", cert.z_threshold));

  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> z_dist(cert.z_threshold, cert.z_threshold + 5.0);
  std::uniform_real_distribution<double> n_dist(280.0, 420.0);
  int bad = 0;
  for (int i = 0; i < 10000; ++i) {
    double z1 = z_dist(rng);
    double n2 = n_dist(rng);
    if (z1 <= cert.z_threshold) continue;
    if (!(cp_curvature(z1, n2, d) < 0.0)) ++bad;
  }
  c.check(bad == 0, fmt("curvature >= 0 at %g of 10000 certified points", bad));
}

void criterion_3() {
  Criterion c(3, "schizophrenia powers", 120.0);
  auto d = schizo();
  RuleSpec jt = RuleSpec::jt(kGamma);
  RuleSpec lr = RuleSpec::lr(0.65 * kGamma, 0.62 * kGamma);

  OperatingChars jt_q = operating_chars_quadrature(jt, d);
  OperatingChars lr_q = operating_chars_quadrature(lr, d);
  c.note(fmt("quadrature power jt %.4f, lr %.4f", jt_q.power, lr_q.power));
  c.check(std::abs(jt_q.power - 0.643) <= 0.015,
          fmt("jt power %.4f vs 0.643 +- 0.015", jt_q.power));
  c.check(std::abs(lr_q.power - 0.640) <= 0.015,
          fmt("lr power %.4f vs 0.640 +- 0.015", lr_q.power));

  SimConfig jt_mc{1000000, 1, 1.6, jt};
  SimConfig lr_mc{1000000, 1, 1.6, lr};
  BatchStats jb = simulate_batch_stats(jt_mc, d);
  BatchStats lb = simulate_batch_stats(lr_mc, d);
  c.check(std::abs(jb.reject_rate - jt_q.power) <= 3.0 * jb.reject_se,
          fmt("jt MC %.4f vs quadrature %.4f beyond 3 SE", jb.reject_rate, jt_q.power));
  c.check(std::abs(lb.reject_rate - lr_q.power) <= 3.0 * lb.reject_se,
          fmt("lr MC %.4f vs quadrature %.4f beyond 3 SE", lb.reject_rate, lr_q.power));
}

void criterion_4() {
  Criterion c(4, "expected-N matching under the alternative", 5.0);
  auto d = schizo();
  OperatingChars jt = operating_chars_quadrature(RuleSpec::jt(kGamma), d);
  OperatingChars lr =
      operating_chars_quadrature(RuleSpec::lr(0.65 * kGamma, 0.62 * kGamma), d);
  double rel = std::abs(jt.e_n_alt - lr.e_n_alt) / jt.e_n_alt;
  c.note(fmt("e_n_alt jt %.2f, lr %.2f, rel diff %.5f", jt.e_n_alt, lr.e_n_alt, rel));
  c.check(rel <= 0.01, fmt("relative difference %.5f exceeds 0.01", rel));
}

void criterion_5() {
  Criterion c(5, "null dominance", 5.0);
  auto d = schizo();
  OperatingChars jt = operating_chars_quadrature(RuleSpec::jt(kGamma), d);
  OperatingChars lr =
      operating_chars_quadrature(RuleSpec::lr(0.65 * kGamma, 0.62 * kGamma), d);
  double margin = (jt.e_n_null - lr.e_n_null) / jt.e_n_null;
  c.note(fmt("e_n_null jt %.2f, lr %.2f, margin %.5f", jt.e_n_null, lr.e_n_null, margin));
  c.check(margin > 1e-4, fmt("relative margin %.6f not above 1e-4", margin));
}

void criterion_6() {
  Criterion c(6, "type I error exactness", 300.0);
  auto d = schizo();
  auto dc = cpz_d();
  const long reps = 1000000;
  const double se = std::sqrt(0.025 * 0.975 / static_cast<double>(reps));
  struct Case {
    const char* name;
    DesignParams design;
    RuleSpec rule;
  };
  std::vector<Case> cases{
      {"jt", d, RuleSpec::jt(kGamma)},
      {"lr", d, RuleSpec::lr(0.65 * kGamma, 0.62 * kGamma)},
      {"roi", d, RuleSpec::roi(50000.0, 1e8, 0.5, 0.5)},
      {"cpz", dc, RuleSpec::cpz(CpzParams{280, 420, 0.8, 0.9})},
  };
  for (const auto& cs : cases) {
    SimConfig cfg{reps, 2024, 0.0, cs.rule};
    BatchStats b = simulate_batch_stats(cfg, cs.design);
    c.note(std::string(cs.name) + fmt(" %.5f", b.reject_rate));
    c.check(std::abs(b.reject_rate - 0.025) <= 3.0 * se,
            std::string(cs.name) +
                fmt(" null rate %.5f vs 0.025 +- %.5f", b.reject_rate, 3.0 * se));
  }
}

void criterion_7() {
  Criterion c(7, "representation round trip", 30.0);
  auto d = schizo();
  auto dc = cpz_d();
  struct Case {
    const char* name;
    DesignParams design;
    RuleSpec rule;
    double z_lo, z_hi;
  };
  std::vector<Case> cases{
      {"jt", d, RuleSpec::jt(kGamma), -1.0, d.delta + 5.0},
      {"lr", d, RuleSpec::lr(0.65 * kGamma, 0.62 * kGamma), -1.0, d.delta + 5.0},
      {"roi", d, RuleSpec::roi(50000.0, 1e8, 0.5, 0.5), -1.0, d.delta + 5.0},
      {"cpz", dc, RuleSpec::cpz(CpzParams{280, 420, 0.8, 0.9}), 0.5, 3.0},
  };
  for (const auto& cs : cases) {
    RuleCurve curve = tabulate_rule(cs.rule, cs.z_lo, cs.z_hi, 501, cs.design);
    RoundtripReport rt = roundtrip_check(curve, cs.design, 1.0);
    c.check(rt.n_checked > 0, std::string(cs.name) + ": no certified points checked");
    c.check(rt.all_passed(),
            std::string(cs.name) +
                fmt(": %g of %g certified points failed the round trip",
                    static_cast<double>(rt.n_checked - rt.n_passed),
                    static_cast<double>(rt.n_checked)));
  }

  // constant-cost rule: implied gamma* constant to 1e-6 across interior points
  RuleCurve jt_curve = tabulate_rule(RuleSpec::jt(kGamma), -1.0, d.delta + 5.0, 501, d);
  AuditReport report = implied_cost(jt_curve, d);
  double lo = 1e300, hi = -1e300;
  for (const auto& pt : report.points) {
    if (pt.kind != BoundKind::exact) continue;
    lo = std::min(lo, pt.implied_gamma);
    hi = std::max(hi, pt.implied_gamma);
  }
  c.check(hi - lo <= 1e-6, fmt("jt implied gamma spread %.2e exceeds 1e-6", hi - lo));
}

void criterion_8() {
  Criterion c(8, "derivative oracles", 5.0);
  auto d = schizo();
  int bad_mgp = 0, bad_curv = 0;
  for (int i = 0; i < 50; ++i) {
    double z1 = -1.0 + 5.0 * i / 49.0;
    for (int j = 0; j < 50; ++j) {
      double n2 = d.n1 + (d.n_max - d.n1) * (j + 1) / 50.0;
      double h = 1e-4 * (n2 - d.n1);
      double fd1 = (conditional_power(z1, n2 + h, d) -
                    conditional_power(z1, n2 - h, d)) /
                   (2.0 * h);
      double m = mgp(z1, n2, d);
      if (std::abs(m - fd1) > 1e-6 * std::abs(m) + 1e-15) ++bad_mgp;
      double fd2 = (conditional_power(z1, n2 + h, d) -
                    2.0 * conditional_power(z1, n2, d) +
                    conditional_power(z1, n2 - h, d)) /
                   (h * h);
      double cv = cp_curvature(z1, n2, d);
      // the 1e-10 floor absorbs difference-quotient roundoff where the
      // curvature crosses zero; observed noise there is below 3e-11
      if (std::abs(cv - fd2) > 1e-5 * std::abs(cv) + 1e-10) ++bad_curv;
    }
  }
  c.note(fmt("grid 50x50, mgp misses %g, curvature misses %g",
             static_cast<double>(bad_mgp), static_cast<double>(bad_curv)));
  c.check(bad_mgp == 0, "mgp does not match central differences at 1e-6 relative");
  c.check(bad_curv == 0,
          "curvature does not match second differences at 1e-5 relative");
}

void criterion_9() {
  Criterion c(9, "interim timing behavior", 10.0);
  auto base = schizo();
  std::vector<double> n1s{80, 110, 140, 170, 200};
  std::vector<double> lr_z, jt_z;
  for (double n1 : n1s) {
    DesignParams d(base.sigma, base.theta_alt, n1, base.n_min, base.n_max,
                   base.alpha);
    auto lr = first_exceedance_z(
        rule_fn(RuleSpec::lr(0.65 * kGamma, 0.62 * kGamma), d), d, -1.0,
        d.delta + 5.0);
    auto jt = first_exceedance_z(rule_fn(RuleSpec::jt(kGamma), d), d, -1.0,
                                 d.delta + 5.0);
    lr_z.push_back(lr ? *lr : std::numeric_limits<double>::infinity());
    jt_z.push_back(jt ? *jt : std::numeric_limits<double>::infinity());
  }
  c.note(fmt("lr thresholds %.3f..%.3f, jt at n1=80: %.3f", lr_z.front(),
             lr_z.back(), jt_z.front()));
  for (std::size_t i = 1; i < lr_z.size(); ++i) {
    c.check(lr_z[i] < lr_z[i - 1],
            fmt("lr threshold not decreasing between n1=%g and n1=%g", n1s[i - 1],
                n1s[i]));
  }
  c.check(lr_z.front() > jt_z.front(),
          fmt("lr threshold %.3f not above jt threshold %.3f at n1=80", lr_z.front(),
              jt_z.front()));
}

void criterion_10() {
  Criterion c(10, "roi orderings", 10.0);
  auto d = schizo();
  const double V = 1e8;
  std::vector<double> costs{40000.0, 70000.0, 100000.0};
  std::vector<RuleCurve> a_curves, b_curves;
  for (double cost : costs) {
    a_curves.push_back(tabulate_rule(RuleSpec::roi(cost, V, 0.5, 0.5), -1.0,
                                     d.delta + 5.0, 501, d));
    b_curves.push_back(tabulate_rule(RuleSpec::roi(cost, V, 2.0 / 3.0, 1.0 / 3.0),
                                     -1.0, d.delta + 5.0, 501, d));
  }
  auto pointwise_geq = [](const RuleCurve& x, const RuleCurve& y) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x.n2_cont[i] < y.n2_cont[i] - 1e-6) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < costs.size(); ++i) {
    c.check(pointwise_geq(a_curves[i], b_curves[i]),
            fmt("prior-a curve below prior-b at c=%g", costs[i]));
  }
  for (std::size_t i = 0; i + 1 < costs.size(); ++i) {
    c.check(pointwise_geq(a_curves[i], a_curves[i + 1]),
            fmt("prior-a curve increases from c=%g to c=%g", costs[i], costs[i + 1]));
    c.check(pointwise_geq(b_curves[i], b_curves[i + 1]),
            fmt("prior-b curve increases from c=%g to c=%g", costs[i], costs[i + 1]));
  }
}

void criterion_11() {
  Criterion c(11, "calibration round trip", 30.0);
  auto d = schizo();
  double l1 = 0.65 * kGamma, l2 = 0.62 * kGamma;
  OperatingChars known = operating_chars_quadrature(RuleSpec::lr(l1, l2), d);
  CalibrationResult res =
      calibrate_lambdas(BudgetPowerTarget{known.e_n_null, known.power}, d);
  double err1 = std::abs(res.lambda1 - l1) / l1;
  double err2 = std::abs(res.lambda2 - l2) / l2;
  c.note(fmt("recovered errors %.4f%% / %.4f%% in %g iterations", 100.0 * err1,
             100.0 * err2, static_cast<double>(res.iterations)));
  c.check(err1 <= 0.01, fmt("lambda1 error %.4f exceeds 1%%", err1));
  c.check(err2 <= 0.01, fmt("lambda2 error %.4f exceeds 1%%", err2));
}
}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  criterion_11();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d acceptance criteria failed\n", g_failures);
  }
  return g_failures;
}
