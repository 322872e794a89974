#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lobjump/rng.hpp"
#include "lobjump/series.hpp"

namespace lobjump {

// Stochastic-volatility model for the efficient log-price on an
// equispaced n-point session grid:
//   dX_t = v_t sigma_t dW_t,
//   d(sigma^2)_t = mr_speed (mr_level - sigma^2_t) dt + vol_of_vol sigma_t dB_t,
//   d[W,B]_t = leverage dt,
//   v_t = (1.2 - 0.2 sin(3 pi t / 4)) * 0.01  (U-shaped intraday factor).
struct SimConfig {
  long n = 23400;
  double mr_speed = 0.0162;
  double mr_level = 0.8465;
  double vol_of_vol = 0.117;
  double leverage = -0.5;
  double sigma0_sq = 0.8465;
  double drift = 0.0;
};

inline double seasonal_factor(double t) {
  return (1.2 - 0.2 * std::sin(0.75 * 3.141592653589793 * t)) * 0.01;
}

struct PathSet {
  std::vector<double> X;     // length n+1, X[0] = x0
  std::vector<double> sigma; // sigma_t (not squared), length n+1
};

// Euler-Maruyama on the grid; sigma^2 is floored at 1e-10 when the
// discretized dynamics dip below zero.
PathSet simulate_path(const SimConfig& config, Rng& rng, double x0 = 0.0);

struct Jump {
  double time = 0.0;
  double size = 0.0;
};

// Adds size to X_t for all grid times >= time. The default sampling
// band for random jump times is [0.1, 0.9] ("not close to the session
// boundaries"); this function accepts any time in (0,1).
void inject_jump(PathSet& path, const Jump& jump);

// Observation noise attached to the simulated path.
//   ar1_gaussian:    eps_{i+1} = phi eps_i + eta_{i+1}, eta ~ N(0, q^2),
//                    eps_0 from the stationary law N(0, q^2/(1-phi^2)).
//   iid_gaussian:    eps_i ~ N(0, q^2).
//   iid_halfnormal:  one-sided by construction; ask noise
//                    (1-2/pi)^{-1/2} q |eps|, so its variance matches a
//                    Gaussian mid-noise of level q.
//   iid_exponential: one-sided, eps ~ q Exp(1).
//   rounding:        two-sided Gaussian noise, then the price level
//                    e^{X+eps} is rounded to the nearest tick multiple
//                    (floored at one tick) and logged again.
struct NoiseSpec {
  enum class Kind {
    ar1_gaussian,
    iid_gaussian,
    iid_halfnormal,
    iid_exponential,
    rounding
  };
  Kind kind = Kind::ar1_gaussian;
  double q = 0.0;
  double phi = -0.5;   // ar1_gaussian only
  double tick = 0.01;  // rounding only
};

// One simulated session: the full two-sided mid series plus the two
// one-sided series obtained by keeping Z_i only where it lies on the
// corresponding side of X_{i/n} (implicit ask/bid sampling). For noise
// kinds that are one-sided by construction the full grid survives on
// the matching side. Exact ties Z_i = X_{i/n} go to the ask.
struct ObservationSet {
  QuoteSeries mid;
  QuoteSeries ask;
  QuoteSeries bid;
  std::vector<double> X;     // true path, full grid
  std::vector<double> sigma; // true sigma path, full grid
  std::optional<Jump> jump;
};

ObservationSet apply_noise(const PathSet& path, const NoiseSpec& spec,
                           Rng& rng);

// Convenience wrapper: path + optional jump + noise in one call with a
// self-contained seed.
struct SessionSpec {
  SimConfig sim;
  NoiseSpec noise;
  std::optional<Jump> jump;
  double x0 = 0.0;
};

ObservationSet simulate_session(const SessionSpec& spec, std::uint64_t seed);

}  // namespace lobjump
