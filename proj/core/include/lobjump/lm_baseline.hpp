#pragma once

#include <cstdint>
#include <vector>

#include "lobjump/series.hpp"

namespace lobjump {

// Noise level from the quadratic variation of ticks:
// q_hat = sqrt( (2n)^{-1} sum (Z_i - Z_{i-1})^2 ).
double estimate_noise_level(const QuoteSeries& series);

struct LMConfig {
  int nh = 11;        // observations per block
  double q_hat = 0.0; // noise level entering the denominator
};

// Maximum standardized difference of adjacent block averages over
// index-based blocks of nh observations (trailing remainder dropped),
// k running from 2. inst_vol is the instantaneous volatility on the
// equispaced grid (length n+1); the denominator at block k is
// sqrt((2/3) sigma^2_{kh} C^2 + 2 q_hat^2) with C = nh / sqrt(n).
double lm_statistic(const QuoteSeries& mid, const LMConfig& cfg,
                    const std::vector<double>& inst_vol);

// Same standardization for a single comparison at a given time: means
// over the nh observations before and after the anchor index.
double lm_local_statistic(const QuoteSeries& mid, double tau, int nh,
                          double inst_vol_at_tau, double q_hat);

// Null resampling scheme: which observation series the replicas build
// on top of the zero-drift Euler paths.
enum class BootScheme {
  additive_mid,    // Z* = X* + q N(0,1), full grid
  halfnormal_ask,  // Y* = X* + (1-2/pi)^{-1/2} q |N(0,1)|, full grid
  thinned_ask,     // Z* kept where the noise is >= 0
  thinned_bid,     // Z* kept where the noise is < 0
};

enum class BootStat { bhr_global, lm_global, bhr_local, lm_local };

struct BootstrapSpec {
  int m = 5000;
  long n = 23400;
  double q_hat = 0.0;
  // Instantaneous volatility driving the Euler replicas, length n+1.
  std::vector<double> vol;
  BootScheme scheme = BootScheme::additive_mid;
  BootStat stat = BootStat::bhr_global;
  int nh = 11;
  // Local statistics are evaluated at a fresh uniform time per replica.
  double tau_lo = 0.1;
  double tau_hi = 0.9;
  std::uint64_t seed = 1;
};

struct BootstrapHandle {
  BootstrapSpec spec;
  std::vector<double> stats;  // sorted ascending

  // Empirical quantile; requires at least 100 replicas.
  double quantile(double level) const;
};

// Simulates m null statistics under the spec and returns them sorted.
// Deterministic in the seed; replicas run in parallel.
BootstrapHandle bootstrap_critical_values(const BootstrapSpec& spec);

}  // namespace lobjump
