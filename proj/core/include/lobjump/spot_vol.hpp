#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lobjump/series.hpp"
#include "lobjump/simulate.hpp"

namespace lobjump {

// Threshold u_n = beta_tr * h^kappa; differences of block extrema larger
// than u_n in absolute value are dropped from the volatility estimate.
struct TruncationSpec {
  double beta_tr = 0.0;
  double kappa = 0.4;
};

// Monte Carlo setup for evaluating the finite-sample mean function of the
// estimator (two independent discretized Brownian grids plus noise).
struct PsiMcConfig {
  long n = 23400;
  NoiseSpec noise;
  int reps = 2000;
  std::uint64_t seed = 1;
};

struct CorrectionSpec {
  enum class Kind { none, constant_factor, psi_inverse };
  Kind kind = Kind::none;
  double factor = 1.0;  // constant_factor: estimate is multiplied by this
  PsiMcConfig mc;       // psi_inverse: inverts the simulated mean function

  static CorrectionSpec none_() { return {}; }
  static CorrectionSpec constant(double c) {
    CorrectionSpec s;
    s.kind = Kind::constant_factor;
    s.factor = c;
    return s;
  }
  static CorrectionSpec psi(PsiMcConfig cfg) {
    CorrectionSpec s;
    s.kind = Kind::psi_inverse;
    s.mc = cfg;
    return s;
  }
};

struct SpotVolConfig {
  enum class Mode { pre, center, post };

  int K_n = 200;
  Mode mode = Mode::pre;
  std::optional<TruncationSpec> truncation;
  CorrectionSpec correction;
};

struct SpotVolPath {
  std::vector<double> values;  // variance estimate per block
  std::vector<bool> ok;        // false where estimation failed
  std::vector<int> truncation_hits;  // dropped differences per window
  std::vector<int> failed_blocks;
  SpotVolConfig config;
};

// Variance of the standardized half-normal difference; the estimator's
// per-window mean square is divided by it, i.e. scaled by
// pi/(2(pi-2)) ~ 1.37580.
inline constexpr double half_normal_diff_variance() {
  return 2.0 * (3.141592653589793238462643383279502884 - 2.0) /
         3.141592653589793238462643383279502884;
}

// Local variance estimate at block k from squared differences of
// neighboring block extrema. Window by mode: pre uses the K_n differences
// before k, post the K_n after, center a symmetric window (K_n odd).
// Windows shrink at the sample boundary and the divisor is the number of
// retained differences. Throws std::runtime_error("all differences
// truncated") when nothing remains.
double spot_vol_at(const ExtremaSeries& extrema, int k,
                   const SpotVolConfig& config);

// Full path with the standardization window rule: blocks with at least
// K_n predecessors use the pre window, earlier blocks the post window
// (config.mode is ignored here). Per-block failures are flagged, not
// fatal.
SpotVolPath spot_vol_path(const ExtremaSeries& extrema,
                          const SpotVolConfig& config);

// Two-pass default for the truncation scale: five times the square root
// of a global untruncated variance estimate over all blocks.
TruncationSpec default_truncation(const ExtremaSeries& extrema,
                                  double kappa = 0.4);

// Simulated finite-sample mean of the variance estimator as a function of
// the true variance: two independent Brownian grids of n*h_n steps plus
// noise, scaled squared difference of their minima, averaged over reps.
// Deterministic for a fixed seed; replications run in parallel.
double psi_mc(double sigma_sq, long n, double h_n, const NoiseSpec& noise,
              int reps, std::uint64_t seed);

}  // namespace lobjump
