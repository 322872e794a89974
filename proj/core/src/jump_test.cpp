#include "lobjump/jump_test.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lobjump/evt.hpp"
#include "lobjump/lm_baseline.hpp"

namespace lobjump {

namespace {

// Volatility path with the configured window at every block, used when
// the caller asks for symmetric standardization windows instead of the
// one-sided rule in spot_vol_path.
SpotVolPath fixed_mode_path(const ExtremaSeries& extrema,
                            const SpotVolConfig& config) {
  const int bc = extrema.block_count;
  SpotVolPath path;
  path.config = config;
  path.values.assign(static_cast<std::size_t>(bc), 0.0);
  path.ok.assign(static_cast<std::size_t>(bc), true);
  path.truncation_hits.assign(static_cast<std::size_t>(bc), 0);
  for (int k = 0; k < bc; ++k) {
    try {
      path.values[static_cast<std::size_t>(k)] =
          spot_vol_at(extrema, k, config);
    } catch (const std::exception&) {
      path.ok[static_cast<std::size_t>(k)] = false;
      path.failed_blocks.push_back(k);
    }
  }
  return path;
}

}  // namespace

double estimate_jump(const QuoteSeries& series, double tau, int nh) {
  WindowExtremum before =
      extrema_window(series, tau, nh, WindowDirection::before);
  WindowExtremum after =
      extrema_window(series, tau, nh, WindowDirection::after);
  return after.value - before.value;
}

double local_statistic_value(const QuoteSeries& series, double tau, int nh,
                             double sd_before, double sd_after) {
  if (!(sd_before > 0.0 && sd_after > 0.0))
    throw std::invalid_argument("local test: nonpositive volatility");
  WindowExtremum before =
      extrema_window(series, tau, nh, WindowDirection::before);
  WindowExtremum after =
      extrema_window(series, tau, nh, WindowDirection::after);
  double h = static_cast<double>(nh) / static_cast<double>(series.n());
  return std::fabs(after.value / sd_after - before.value / sd_before) /
         std::sqrt(h);
}

LocalTestReport local_test(const QuoteSeries& series, double tau, int nh,
                           const SpotVolConfig& spot_cfg, double alpha) {
  series.validate();
  if (nh < 2) throw std::invalid_argument("local test: nh < 2");
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("local test: tau outside (0,1)");

  BlockGrid grid = build_block_grid(series, GridTarget::per_block(nh));
  ExtremaSeries extrema = local_extrema(series, grid);
  int k = std::min(static_cast<int>(tau * grid.block_count),
                   grid.block_count - 1);

  SpotVolConfig cfg = spot_cfg;
  cfg.mode = SpotVolConfig::Mode::pre;
  double var_before = spot_vol_at(extrema, k, cfg);
  cfg.mode = SpotVolConfig::Mode::post;
  double var_after = spot_vol_at(extrema, k, cfg);

  WindowExtremum before =
      extrema_window(series, tau, nh, WindowDirection::before);
  WindowExtremum after =
      extrema_window(series, tau, nh, WindowDirection::after);

  LocalTestReport report;
  report.extremum_before = before.value;
  report.extremum_after = after.value;
  report.var_before = var_before;
  report.var_after = var_after;
  report.window_shrunk = before.shrunk || after.shrunk;
  report.statistic = local_statistic_value(
      series, tau, nh, std::sqrt(var_before), std::sqrt(var_after));
  report.quantile = evt::local_quantile(alpha);
  report.reject = report.statistic > report.quantile;
  report.tau = tau;
  report.nh = nh;
  report.alpha = alpha;
  return report;
}

GlobalStatistic global_statistic(const ExtremaSeries& extrema,
                                 const SpotVolPath& volpath) {
  const int bc = extrema.block_count;
  if (static_cast<int>(volpath.values.size()) != bc)
    throw std::invalid_argument("global statistic: path/grid size mismatch");

  GlobalStatistic stat;
  stat.std_diffs.assign(static_cast<std::size_t>(bc), 0.0);
  stat.diff_valid.assign(static_cast<std::size_t>(bc), false);

  int valid = 0;
  for (int k = 1; k < bc; ++k) {
    std::size_t ku = static_cast<std::size_t>(k);
    if (!extrema.usable(k) || !extrema.usable(k - 1)) continue;
    if (!volpath.ok[ku] || !(volpath.values[ku] > 0.0)) continue;
    double d = (extrema.values[ku] - extrema.values[ku - 1]) /
               std::sqrt(volpath.values[ku]);
    stat.std_diffs[ku] = d;
    stat.diff_valid[ku] = true;
    ++valid;
    if (std::fabs(d) > stat.T_raw) {
      stat.T_raw = std::fabs(d);
      stat.argmax_block = k;
    }
  }
  if (valid < 2)
    throw std::runtime_error("global statistic: fewer than 2 valid differences");
  return stat;
}

GlobalStatistic global_statistic(const QuoteSeries& series,
                                 const BlockGrid& grid,
                                 const SpotVolPath& volpath) {
  return global_statistic(local_extrema(series, grid), volpath);
}

GlobalTestReport global_test(const QuoteSeries& series, GridTarget target,
                             const SpotVolConfig& spot_cfg, double alpha,
                             CriticalSource source,
                             const BootstrapHandle* handle) {
  series.validate();
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("global test: alpha outside (0,1)");

  // Bootstrap criticals are quantiles of statistics over fixed-count
  // blocks (the resampler's convention), so the data statistic must
  // block the same way; with irregular sampling the two partitions
  // differ. The asymptotic test keeps the time partition of the grid.
  ExtremaSeries extrema;
  if (source == CriticalSource::bootstrap) {
    const int per_block =
        target.kind == GridTarget::Kind::observations_per_block
            ? target.value
            : static_cast<int>(series.size() /
                               static_cast<std::size_t>(target.value));
    extrema = extrema_by_count(series, per_block);
  } else {
    extrema = local_extrema(series, build_block_grid(series, target));
  }

  SpotVolConfig cfg = spot_cfg;
  if (!cfg.truncation) cfg.truncation = default_truncation(extrema);
  SpotVolPath volpath = cfg.mode == SpotVolConfig::Mode::center
                            ? fixed_mode_path(extrema, cfg)
                            : spot_vol_path(extrema, cfg);

  GlobalStatistic stat = global_statistic(extrema, volpath);

  const int bc = extrema.block_count;
  evt::GumbelCalibration cal =
      evt::halfnorm_max_calibration(static_cast<std::size_t>(bc) - 1);
  double scaled = stat.T_raw / std::sqrt(extrema.block_length);

  GlobalTestReport report;
  report.T_raw = stat.T_raw;
  report.T_std = (scaled - cal.b_N) / cal.a_N;
  report.source = source;
  report.alpha = alpha;
  report.argmax_block = stat.argmax_block;
  report.std_diffs = std::move(stat.std_diffs);
  report.diff_valid = std::move(stat.diff_valid);
  report.block_count = bc;
  report.block_length = extrema.block_length;

  if (source == CriticalSource::asymptotic) {
    report.critical_value = evt::gumbel_quantile(alpha);
    report.reject = report.T_std > report.critical_value;
  } else {
    if (handle == nullptr)
      throw std::invalid_argument("global test: bootstrap source needs a handle");
    report.critical_value = handle->quantile(1.0 - alpha);
    report.reject = report.T_raw > report.critical_value;
  }

  report.theta_hat = localize_jump(report);
  int nh = std::max(
      2, static_cast<int>(std::lround(static_cast<double>(series.n()) / bc)));
  report.jump_size = estimate_jump(series, report.theta_hat, nh);
  return report;
}

double localize_jump(const GlobalTestReport& report) {
  if (report.argmax_block < 0)
    throw std::invalid_argument("localize: report has no argmax");
  return report.block_length * report.argmax_block;
}

std::vector<JumpEvent> sequential_detect(const QuoteSeries& series,
                                         const SequentialConfig& config) {
  GlobalTestReport report = global_test(series, config.grid, config.spot,
                                        config.alpha);
  std::vector<JumpEvent> events;
  std::vector<double> diffs = report.std_diffs;
  std::vector<bool> valid = report.diff_valid;
  int remaining = 0;
  for (bool v : valid) remaining += v ? 1 : 0;

  double alpha = config.alpha;
  int argmax = report.argmax_block;
  double t_raw = report.T_raw;
  double t_std = report.T_std;
  double crit = evt::gumbel_quantile(alpha);
  int nh = std::max(2, static_cast<int>(std::lround(
                   static_cast<double>(series.n()) / report.block_count)));

  while (t_std > crit && static_cast<int>(events.size()) < config.max_jumps) {
    JumpEvent event;
    event.session_time = report.block_length * argmax;
    event.wall_clock = series.session.wall_clock_start +
                       event.session_time * series.session.wall_seconds();
    event.size = estimate_jump(series, event.session_time, nh);
    event.direction = event.size > 0.0 ? 1 : (event.size < 0.0 ? -1 : 0);
    event.block = argmax;
    event.interval_lo = event.session_time;
    event.interval_hi = event.session_time + report.block_length;
    event.alpha = alpha;
    events.push_back(event);

    // Discard the detected difference and recenter for one fewer.
    valid[static_cast<std::size_t>(argmax)] = false;
    --remaining;
    if (remaining < 2) break;

    alpha *= config.alpha_decay;
    crit = evt::gumbel_quantile(alpha);

    t_raw = 0.0;
    argmax = -1;
    for (int k = 1; k < report.block_count; ++k) {
      if (!valid[static_cast<std::size_t>(k)]) continue;
      double a = std::fabs(diffs[static_cast<std::size_t>(k)]);
      if (a > t_raw) {
        t_raw = a;
        argmax = k;
      }
    }
    evt::GumbelCalibration cal = evt::halfnorm_max_calibration(
        static_cast<std::size_t>(remaining));
    t_std = (t_raw / std::sqrt(report.block_length) - cal.b_N) / cal.a_N;
  }
  return events;
}

SpotVolPath true_vol_path(const std::vector<double>& inst_vol,
                          int block_count) {
  if (block_count < 1 || inst_vol.empty())
    throw std::invalid_argument("true_vol_path: empty input");
  SpotVolPath path;
  std::size_t last = inst_vol.size() - 1;
  path.values.reserve(static_cast<std::size_t>(block_count));
  for (int k = 0; k < block_count; ++k) {
    std::size_t i = static_cast<std::size_t>(std::lround(
        static_cast<double>(k) * static_cast<double>(last) / block_count));
    double v = inst_vol[std::min(i, last)];
    path.values.push_back(v * v);
  }
  path.ok.assign(static_cast<std::size_t>(block_count), true);
  path.truncation_hits.assign(static_cast<std::size_t>(block_count), 0);
  return path;
}

}  // namespace lobjump
