#pragma once

#include <optional>
#include <vector>

#include "lobjump/series.hpp"
#include "lobjump/spot_vol.hpp"

namespace lobjump {

enum class CriticalSource { asymptotic, bootstrap };

struct BootstrapHandle;  // lm_baseline.hpp

// A detected jump. direction is the sign of the size estimate; latency
// and the localization interval are filled by the online detector.
struct JumpEvent {
  double session_time = 0.0;
  double wall_clock = 0.0;
  double size = 0.0;
  int direction = 0;
  int block = -1;
  double latency_seconds = 0.0;
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  double alpha = 0.0;
};

struct GlobalTestReport {
  double T_raw = 0.0;
  // Rate-scaled and centered version compared against Gumbel quantiles.
  double T_std = 0.0;
  double critical_value = 0.0;
  CriticalSource source = CriticalSource::asymptotic;
  bool reject = false;
  int argmax_block = -1;
  double theta_hat = 0.0;  // block_length * argmax_block
  double jump_size = 0.0;  // windowed-extrema difference at theta_hat
  // Signed standardized differences (m_k - m_{k-1}) / sigma_k, indexed by
  // the newer block k; entry 0 and entries touching failed blocks are
  // marked invalid.
  std::vector<double> std_diffs;
  std::vector<bool> diff_valid;
  int block_count = 0;
  double block_length = 0.0;
  double alpha = 0.0;
};

struct LocalTestReport {
  double statistic = 0.0;
  double quantile = 0.0;
  bool reject = false;
  double extremum_before = 0.0;
  double extremum_after = 0.0;
  double var_before = 0.0;
  double var_after = 0.0;
  bool window_shrunk = false;
  double tau = 0.0;
  int nh = 0;
  double alpha = 0.0;
};

struct GlobalStatistic {
  double T_raw = 0.0;
  int argmax_block = -1;
  std::vector<double> std_diffs;
  std::vector<bool> diff_valid;
};

// Difference of the windowed extrema over nh observations after and
// before tau; minima for lower-bounded series, maxima for upper-bounded.
double estimate_jump(const QuoteSeries& series, double tau, int nh);

// Standardized two-sided comparison at tau: each windowed extremum is
// divided by the volatility estimate from its own side, so a volatility
// jump at tau does not masquerade as a price jump. sd_before/sd_after
// are standard deviations.
double local_statistic_value(const QuoteSeries& series, double tau, int nh,
                             double sd_before, double sd_after);

// Local test at a given time: windowed extrema, one-sided (pre/post)
// volatility estimates per spot_cfg, and the analytic quantile for the
// half-normal difference law.
LocalTestReport local_test(const QuoteSeries& series, double tau, int nh,
                           const SpotVolConfig& spot_cfg, double alpha);

// Maximum standardized absolute difference of adjacent block extrema.
// Differences touching a filled block or a failed volatility estimate
// are skipped; throws when fewer than two valid differences remain.
GlobalStatistic global_statistic(const ExtremaSeries& extrema,
                                 const SpotVolPath& volpath);
GlobalStatistic global_statistic(const QuoteSeries& series,
                                 const BlockGrid& grid,
                                 const SpotVolPath& volpath);

// Full test: builds the grid, extrema and volatility path (two-pass
// truncation default when none is configured), standardizes the maximum
// and decides at level alpha. spot_cfg.mode center standardizes every
// difference with the symmetric window; other modes follow the
// one-sided rule of spot_vol_path. source=bootstrap compares T_raw
// against the handle's empirical quantile instead and blocks by
// observation count (matching the resampler) rather than by time.
GlobalTestReport global_test(const QuoteSeries& series, GridTarget target,
                             const SpotVolConfig& spot_cfg, double alpha,
                             CriticalSource source = CriticalSource::asymptotic,
                             const BootstrapHandle* handle = nullptr);

// Jump time estimate: left boundary of the argmax block.
double localize_jump(const GlobalTestReport& report);

struct SequentialConfig {
  GridTarget grid = GridTarget::per_block(30);
  SpotVolConfig spot;
  double alpha = 0.05;
  // Level multiplier per detected jump; 1.0 keeps the level constant.
  double alpha_decay = 1.0;
  int max_jumps = 10;
};

// Repeated testing: detect, discard the detected difference, recenter
// the maximum calibration with one fewer difference, test again.
std::vector<JumpEvent> sequential_detect(const QuoteSeries& series,
                                         const SequentialConfig& config);

// Volatility path for simulation comparisons where the true instantaneous
// volatility is known on an equispaced grid: per-block variance sampled
// at the block's left boundary.
SpotVolPath true_vol_path(const std::vector<double>& inst_vol,
                          int block_count);

}  // namespace lobjump
