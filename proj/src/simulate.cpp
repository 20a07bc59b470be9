#include "ssr/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "ssr/normal.hpp"
#include "ssr/rng.hpp"

namespace ssr {

namespace {
constexpr long kChunk = 8192;  // fixed chunking keeps aggregation thread-count independent

struct ChunkSums {
  std::uint64_t rejections = 0;
  std::uint64_t n2_true = 0, n2_true_sq = 0;
  std::uint64_t n2_null = 0, n2_null_sq = 0;
  std::uint64_t n2_alt = 0, n2_alt_sq = 0;
};

struct ReplicateDraws {
  double z_base;  // interim statistic under theta = 0
  double z_inc_base;
};

ReplicateDraws draws_for(std::uint64_t seed, long replicate) {
  std::uint64_t i = static_cast<std::uint64_t>(replicate);
  return {norm_quantile(uniform_open01(seed, 2 * i)),
          norm_quantile(uniform_open01(seed, 2 * i + 1))};
}

void validate(const SimConfig& config) {
  if (config.n_reps < 1) throw std::invalid_argument("sim: n_reps must be >= 1");
}

double mean_of(std::uint64_t sum, long n) {
  return static_cast<double>(sum) / static_cast<double>(n);
}

double se_of(std::uint64_t sum, std::uint64_t sum_sq, long n) {
  if (n < 2) return 0.0;
  double mean = mean_of(sum, n);
  double var = (static_cast<double>(sum_sq) - static_cast<double>(n) * mean * mean) /
               (static_cast<double>(n) - 1.0);
  return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
}
}  // namespace

TrialOutcome simulate_trial(const SimConfig& config, long replicate,
                            const DesignParams& design) {
  validate(config);
  const double drift_true = config.theta_true * std::sqrt(design.n1) / (2.0 * design.sigma);
  ReplicateDraws d = draws_for(config.seed, replicate);
  double z1 = d.z_base + drift_true;
  RulePoint pt = evaluate_rule(config.rule, z1, design);
  long n2 = round_half_up(pt.n2);
  double inc_drift =
      config.theta_true * std::sqrt(static_cast<double>(n2) - design.n1) /
      (2.0 * design.sigma);
  double z_inc = d.z_inc_base + inc_drift;
  double z_combined = design.w1 * z1 + design.w2 * z_inc;
  return {z1, n2, z_combined, z_combined > design.c_crit};
}

BatchStats simulate_batch_stats(const SimConfig& config, const DesignParams& design) {
  validate(config);
  const double drift_true = config.theta_true * std::sqrt(design.n1) / (2.0 * design.sigma);
  const double drift_alt = design.delta;
  const bool true_is_null = drift_true == 0.0;
  const bool true_is_alt = drift_true == drift_alt;

  const long n_chunks = (config.n_reps + kChunk - 1) / kChunk;
  std::vector<ChunkSums> sums(static_cast<std::size_t>(n_chunks));

  auto run_chunk = [&](long c) {
    ChunkSums s;
    const long lo = c * kChunk;
    const long hi = std::min(config.n_reps, lo + kChunk);
    for (long i = lo; i < hi; ++i) {
      ReplicateDraws d = draws_for(config.seed, i);

      long n2_null = round_half_up(evaluate_rule(config.rule, d.z_base, design).n2);
      long n2_alt =
          round_half_up(evaluate_rule(config.rule, d.z_base + drift_alt, design).n2);
      long n2_true;
      if (true_is_null) n2_true = n2_null;
      else if (true_is_alt) n2_true = n2_alt;
      else
        n2_true = round_half_up(
            evaluate_rule(config.rule, d.z_base + drift_true, design).n2);

      double inc_drift = config.theta_true *
                         std::sqrt(static_cast<double>(n2_true) - design.n1) /
                         (2.0 * design.sigma);
      double z_combined = design.w1 * (d.z_base + drift_true) +
                          design.w2 * (d.z_inc_base + inc_drift);
      s.rejections += z_combined > design.c_crit ? 1u : 0u;
      s.n2_true += static_cast<std::uint64_t>(n2_true);
      s.n2_true_sq += static_cast<std::uint64_t>(n2_true) * n2_true;
      s.n2_null += static_cast<std::uint64_t>(n2_null);
      s.n2_null_sq += static_cast<std::uint64_t>(n2_null) * n2_null;
      s.n2_alt += static_cast<std::uint64_t>(n2_alt);
      s.n2_alt_sq += static_cast<std::uint64_t>(n2_alt) * n2_alt;
    }
    sums[static_cast<std::size_t>(c)] = s;
  };

  int workers = config.workers > 0
                    ? config.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, 16));
  if (workers == 1 || n_chunks == 1) {
    for (long c = 0; c < n_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (long c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
          run_chunk(c);
      });
    }
    for (auto& t : pool) t.join();
  }

  ChunkSums total;
  for (const auto& s : sums) {
    total.rejections += s.rejections;
    total.n2_true += s.n2_true;
    total.n2_true_sq += s.n2_true_sq;
    total.n2_null += s.n2_null;
    total.n2_null_sq += s.n2_null_sq;
    total.n2_alt += s.n2_alt;
    total.n2_alt_sq += s.n2_alt_sq;
  }

  BatchStats b{};
  b.n_reps = config.n_reps;
  b.seed = config.seed;
  b.theta_true = config.theta_true;
  b.reject_rate = mean_of(total.rejections, config.n_reps);
  b.reject_se = std::sqrt(b.reject_rate * (1.0 - b.reject_rate) /
                          static_cast<double>(config.n_reps));
  b.mean_n2 = mean_of(total.n2_true, config.n_reps);
  b.se_n2 = se_of(total.n2_true, total.n2_true_sq, config.n_reps);
  b.e_n_null = mean_of(total.n2_null, config.n_reps);
  b.se_n_null = se_of(total.n2_null, total.n2_null_sq, config.n_reps);
  b.e_n_alt = mean_of(total.n2_alt, config.n_reps);
  b.se_n_alt = se_of(total.n2_alt, total.n2_alt_sq, config.n_reps);
  return b;
}

OperatingChars simulate_batch(const SimConfig& config, const DesignParams& design) {
  BatchStats b = simulate_batch_stats(config, design);
  OperatingChars oc{};
  oc.power = b.reject_rate;
  oc.e_n_null = b.e_n_null;
  oc.e_n_alt = b.e_n_alt;
  oc.type1 = config.theta_true == 0.0 ? b.reject_rate : design.alpha;
  oc.method = OcMethod::monte_carlo;
  oc.error_bound = std::max({b.reject_se, b.se_n_null, b.se_n_alt});
  return oc;
}

std::vector<TimingSweepEntry> timing_sweep(const std::vector<double>& n1_values,
                                           double gamma, double lambda1,
                                           double lambda2,
                                           const DesignParams& base) {
  std::vector<TimingSweepEntry> out;
  out.reserve(n1_values.size());
  for (double n1 : n1_values) {
    if (!(n1 < base.n_min))
      throw std::invalid_argument("timing_sweep: every n1 must be below n_min");
    // weights re-frozen at each interim size
    DesignParams d(base.sigma, base.theta_alt, n1, base.n_min, base.n_max,
                   base.alpha);
    RuleSpec jt = RuleSpec::jt(gamma);
    RuleSpec lr = RuleSpec::lr(lambda1, lambda2);
    TimingSweepEntry e{
        n1,
        tabulate_rule(jt, default_z_lo(d), default_z_hi(d), 501, d),
        tabulate_rule(lr, default_z_lo(d), default_z_hi(d), 501, d),
        operating_chars_quadrature(jt, d),
        operating_chars_quadrature(lr, d),
        first_exceedance_z(rule_fn(jt, d), d, default_z_lo(d), default_z_hi(d)),
        first_exceedance_z(rule_fn(lr, d), d, default_z_lo(d), default_z_hi(d))};
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace ssr
