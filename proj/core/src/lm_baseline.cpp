#include "lobjump/lm_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lobjump/jump_test.hpp"
#include "lobjump/parallel.hpp"
#include "lobjump/rng.hpp"
#include "lobjump/simulate.hpp"

namespace lobjump {

double estimate_noise_level(const QuoteSeries& series) {
  const std::size_t len = series.values.size();
  if (len < 2) throw std::invalid_argument("noise level: series too short");
  double sum = 0.0;
  for (std::size_t i = 1; i < len; ++i) {
    double d = series.values[i] - series.values[i - 1];
    sum += d * d;
  }
  return std::sqrt(sum / (2.0 * static_cast<double>(len - 1)));
}

namespace {

double lm_denominator(double inst_vol, double c_sq, double q_hat) {
  double var = (2.0 / 3.0) * inst_vol * inst_vol * c_sq +
               2.0 * q_hat * q_hat;
  if (!(var > 0.0))
    throw std::invalid_argument("lm statistic: degenerate denominator");
  return std::sqrt(var);
}

}  // namespace

double lm_statistic(const QuoteSeries& mid, const LMConfig& cfg,
                    const std::vector<double>& inst_vol) {
  if (cfg.nh < 2) throw std::invalid_argument("lm statistic: nh < 2");
  const long n = mid.n();
  const std::size_t len = mid.values.size();
  const int blocks = static_cast<int>(len / static_cast<std::size_t>(cfg.nh));
  if (blocks < 3)
    throw std::invalid_argument("lm statistic: fewer than 3 blocks");

  std::vector<double> avg(static_cast<std::size_t>(blocks));
  for (int k = 0; k < blocks; ++k) {
    double s = 0.0;
    std::size_t base = static_cast<std::size_t>(k) * cfg.nh;
    for (int i = 0; i < cfg.nh; ++i) s += mid.values[base + i];
    avg[static_cast<std::size_t>(k)] = s / cfg.nh;
  }

  const double c_sq = static_cast<double>(cfg.nh) * cfg.nh / n;
  const std::size_t last_vol = inst_vol.size() - 1;
  double t_max = 0.0;
  for (int k = 2; k < blocks; ++k) {
    std::size_t vi = std::min(static_cast<std::size_t>(k) * cfg.nh, last_vol);
    double denom = lm_denominator(inst_vol[vi], c_sq, cfg.q_hat);
    double d = std::fabs(avg[static_cast<std::size_t>(k)] -
                         avg[static_cast<std::size_t>(k) - 1]) / denom;
    t_max = std::max(t_max, d);
  }
  return t_max;
}

double lm_local_statistic(const QuoteSeries& mid, double tau, int nh,
                          double inst_vol_at_tau, double q_hat) {
  if (nh < 2) throw std::invalid_argument("lm local: nh < 2");
  const long len = static_cast<long>(mid.values.size());
  long anchor = static_cast<long>(
      std::upper_bound(mid.times.begin(), mid.times.end(), tau) -
      mid.times.begin()) - 1;
  long before_lo = anchor - nh + 1;
  long after_hi = anchor + nh;
  if (before_lo < 0 || after_hi >= len)
    throw std::invalid_argument("lm local: window leaves the sample");

  double before = 0.0, after = 0.0;
  for (long i = before_lo; i <= anchor; ++i)
    before += mid.values[static_cast<std::size_t>(i)];
  for (long i = anchor + 1; i <= after_hi; ++i)
    after += mid.values[static_cast<std::size_t>(i)];
  before /= nh;
  after /= nh;

  double c_sq = static_cast<double>(nh) * nh / mid.n();
  return std::fabs(after - before) /
         lm_denominator(inst_vol_at_tau, c_sq, q_hat);
}

double BootstrapHandle::quantile(double level) const {
  if (stats.size() < 100)
    throw std::invalid_argument("bootstrap: fewer than 100 replicas");
  if (!(level > 0.0 && level < 1.0))
    throw std::invalid_argument("bootstrap: level outside (0,1)");
  double pos = level * static_cast<double>(stats.size());
  std::size_t idx = static_cast<std::size_t>(std::ceil(pos));
  if (idx > 0) --idx;
  return stats[std::min(idx, stats.size() - 1)];
}

BootstrapHandle bootstrap_critical_values(const BootstrapSpec& spec) {
  if (spec.m < 1) throw std::invalid_argument("bootstrap: m < 1");
  if (spec.n < 2) throw std::invalid_argument("bootstrap: n < 2");
  if (spec.vol.size() != static_cast<std::size_t>(spec.n) + 1)
    throw std::invalid_argument("bootstrap: vol path must have n+1 points");
  if (!(spec.q_hat >= 0.0)) throw std::invalid_argument("bootstrap: q_hat < 0");

  NoiseSpec noise;
  noise.q = spec.q_hat;
  noise.kind = spec.scheme == BootScheme::halfnormal_ask
                   ? NoiseSpec::Kind::iid_halfnormal
                   : NoiseSpec::Kind::iid_gaussian;

  BootstrapHandle handle;
  handle.spec = spec;
  handle.stats.assign(static_cast<std::size_t>(spec.m), 0.0);

  const double sq_dt = std::sqrt(1.0 / static_cast<double>(spec.n));

  parallel_for(static_cast<std::size_t>(spec.m), [&](std::size_t j) {
    Rng rng(derive_seed(spec.seed, j));

    PathSet path;
    path.X.resize(spec.vol.size());
    path.sigma = spec.vol;
    double x = 0.0;
    path.X[0] = x;
    for (std::size_t i = 1; i < path.X.size(); ++i) {
      x += spec.vol[i - 1] * sq_dt * rng.normal();
      path.X[i] = x;
    }

    ObservationSet obs = apply_noise(path, noise, rng);
    const QuoteSeries* series = &obs.mid;
    switch (spec.scheme) {
      case BootScheme::additive_mid: series = &obs.mid; break;
      case BootScheme::halfnormal_ask:
      case BootScheme::thinned_ask: series = &obs.ask; break;
      case BootScheme::thinned_bid: series = &obs.bid; break;
    }

    double stat = 0.0;
    switch (spec.stat) {
      case BootStat::bhr_global: {
        ExtremaSeries extrema = extrema_by_count(*series, spec.nh);
        SpotVolPath volpath = true_vol_path(spec.vol, extrema.block_count);
        stat = global_statistic(extrema, volpath).T_raw;
        break;
      }
      case BootStat::lm_global: {
        LMConfig cfg{spec.nh, spec.q_hat};
        stat = lm_statistic(*series, cfg, spec.vol);
        break;
      }
      case BootStat::bhr_local: {
        double tau = spec.tau_lo + (spec.tau_hi - spec.tau_lo) * rng.uniform();
        std::size_t vi = static_cast<std::size_t>(
            std::lround(tau * static_cast<double>(spec.n)));
        double sd = spec.vol[std::min(vi, spec.vol.size() - 1)];
        stat = local_statistic_value(*series, tau, spec.nh, sd, sd);
        break;
      }
      case BootStat::lm_local: {
        double tau = spec.tau_lo + (spec.tau_hi - spec.tau_lo) * rng.uniform();
        std::size_t vi = static_cast<std::size_t>(
            std::lround(tau * static_cast<double>(spec.n)));
        double sd = spec.vol[std::min(vi, spec.vol.size() - 1)];
        stat = lm_local_statistic(*series, tau, spec.nh, sd, spec.q_hat);
        break;
      }
    }
    handle.stats[j] = stat;
  });

  std::sort(handle.stats.begin(), handle.stats.end());
  return handle;
}

}  // namespace lobjump
