#include "lobjump/spot_vol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "lobjump/parallel.hpp"
#include "lobjump/rng.hpp"

namespace lobjump {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kPrefactor = kPi / (2.0 * (kPi - 2.0));

void check_config(const SpotVolConfig& config) {
  if (config.K_n < 1) throw std::invalid_argument("spot_vol: K_n < 1");
  if (config.mode == SpotVolConfig::Mode::center && config.K_n % 2 == 0)
    throw std::invalid_argument("spot_vol: center window needs odd K_n");
  if (config.truncation) {
    if (!(config.truncation->beta_tr > 0.0))
      throw std::invalid_argument("spot_vol: beta_tr <= 0");
    double kappa = config.truncation->kappa;
    if (!(kappa > 0.0 && kappa < 0.5))
      throw std::invalid_argument("spot_vol: kappa outside (0, 1/2)");
  }
}

struct WindowSum {
  double sum_sq = 0.0;
  int retained = 0;
  int truncated = 0;
};

// Accumulates squared extrema differences d_r = m_r - m_{r-1} for r in
// [lo, hi], skipping differences touching a filled block and, when a
// threshold is given, differences with |d_r| > u_n.
WindowSum accumulate(const ExtremaSeries& extrema, int lo, int hi,
                     const std::optional<double>& threshold) {
  WindowSum w;
  for (int r = std::max(lo, 1);
       r <= std::min(hi, extrema.block_count - 1); ++r) {
    if (!extrema.usable(r) || !extrema.usable(r - 1)) continue;
    double d = extrema.values[static_cast<std::size_t>(r)] -
               extrema.values[static_cast<std::size_t>(r) - 1];
    if (threshold && std::fabs(d) > *threshold) {
      ++w.truncated;
      continue;
    }
    w.sum_sq += d * d;
    ++w.retained;
  }
  return w;
}

double solve_psi_inverse(double target, double h_n, const PsiMcConfig& mc) {
  if (!(target > 0.0))
    throw std::invalid_argument("spot_vol: nonpositive estimate");
  // Common seed across evaluations keeps the simulated mean function
  // monotone in sigma^2, so plain bisection applies.
  auto psi = [&](double s2) {
    return psi_mc(s2, mc.n, h_n, mc.noise, mc.reps, mc.seed);
  };
  double lo = 0.0;
  double hi = std::max(target, 1e-12);
  for (int i = 0; i < 80 && psi(hi) < target; ++i) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-6; ++i) {
    double mid = 0.5 * (lo + hi);
    (psi(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double estimate_window(const ExtremaSeries& extrema, int lo, int hi,
                       const SpotVolConfig& config, int* hits) {
  std::optional<double> threshold;
  if (config.truncation)
    threshold = config.truncation->beta_tr *
                std::pow(extrema.block_length, config.truncation->kappa);

  WindowSum w = accumulate(extrema, lo, hi, threshold);
  if (hits) *hits = w.truncated;
  if (w.retained == 0) {
    if (w.truncated > 0)
      throw std::runtime_error("all differences truncated");
    throw std::invalid_argument("spot_vol: empty estimation window");
  }

  double h_inv = static_cast<double>(extrema.block_count);
  double est = kPrefactor * h_inv * w.sum_sq / w.retained;

  switch (config.correction.kind) {
    case CorrectionSpec::Kind::none:
      return est;
    case CorrectionSpec::Kind::constant_factor:
      return est * config.correction.factor;
    case CorrectionSpec::Kind::psi_inverse:
      return solve_psi_inverse(est, extrema.block_length,
                               config.correction.mc);
  }
  return est;
}

void window_bounds(SpotVolConfig::Mode mode, int k, int K, int* lo,
                   int* hi) {
  switch (mode) {
    case SpotVolConfig::Mode::pre:
      *lo = k - K;
      *hi = k - 1;
      break;
    case SpotVolConfig::Mode::post:
      *lo = k + 1;
      *hi = k + K;
      break;
    case SpotVolConfig::Mode::center:
      *lo = k - (K - 1) / 2;
      *hi = k + (K - 1) / 2;
      break;
  }
}

}  // namespace

double spot_vol_at(const ExtremaSeries& extrema, int k,
                   const SpotVolConfig& config) {
  check_config(config);
  if (k < 0 || k >= extrema.block_count)
    throw std::invalid_argument("spot_vol: block index out of range");
  int lo = 0, hi = 0;
  window_bounds(config.mode, k, config.K_n, &lo, &hi);
  return estimate_window(extrema, lo, hi, config, nullptr);
}

SpotVolPath spot_vol_path(const ExtremaSeries& extrema,
                          const SpotVolConfig& config) {
  check_config(config);
  const int bc = extrema.block_count;
  SpotVolPath path;
  path.config = config;
  path.values.assign(static_cast<std::size_t>(bc), 0.0);
  path.ok.assign(static_cast<std::size_t>(bc), true);
  path.truncation_hits.assign(static_cast<std::size_t>(bc), 0);

  for (int k = 0; k < bc; ++k) {
    bool use_pre = k >= config.K_n;
    int lo = 0, hi = 0;
    window_bounds(use_pre ? SpotVolConfig::Mode::pre
                          : SpotVolConfig::Mode::post,
                  k, config.K_n, &lo, &hi);
    int hits = 0;
    try {
      path.values[static_cast<std::size_t>(k)] =
          estimate_window(extrema, lo, hi, config, &hits);
    } catch (const std::exception&) {
      path.ok[static_cast<std::size_t>(k)] = false;
      path.failed_blocks.push_back(k);
    }
    path.truncation_hits[static_cast<std::size_t>(k)] = hits;
  }
  return path;
}

TruncationSpec default_truncation(const ExtremaSeries& extrema,
                                  double kappa) {
  WindowSum w =
      accumulate(extrema, 1, extrema.block_count - 1, std::nullopt);
  if (w.retained == 0)
    throw std::invalid_argument("spot_vol: no usable differences");
  double h_inv = static_cast<double>(extrema.block_count);
  double global_var = kPrefactor * h_inv * w.sum_sq / w.retained;
  TruncationSpec spec;
  spec.beta_tr = 5.0 * std::sqrt(global_var);
  spec.kappa = kappa;
  return spec;
}

double psi_mc(double sigma_sq, long n, double h_n, const NoiseSpec& noise,
              int reps, std::uint64_t seed) {
  if (sigma_sq < 0.0) throw std::invalid_argument("psi_mc: sigma_sq < 0");
  if (reps < 1) throw std::invalid_argument("psi_mc: reps < 1");
  long nh = std::lround(static_cast<double>(n) * h_n);
  if (nh < 2) throw std::invalid_argument("psi_mc: fewer than 2 obs per block");
  if (noise.kind == NoiseSpec::Kind::rounding)
    throw std::invalid_argument("psi_mc: rounding noise is not additive");

  const double sigma = std::sqrt(sigma_sq);
  const double sq_dt = std::sqrt(1.0 / static_cast<double>(n));
  const std::size_t m = static_cast<std::size_t>(nh);

  auto draw_noise = [&noise](Rng& rng, std::vector<double>& eps) {
    const double q = noise.q;
    switch (noise.kind) {
      case NoiseSpec::Kind::ar1_gaussian: {
        double phi = noise.phi;
        double e = q > 0.0 ? q / std::sqrt(1.0 - phi * phi) * rng.normal()
                           : 0.0;
        for (double& v : eps) {
          v = e;
          e = phi * e + q * rng.normal();
        }
        break;
      }
      case NoiseSpec::Kind::iid_gaussian:
        for (double& v : eps) v = q * rng.normal();
        break;
      case NoiseSpec::Kind::iid_halfnormal: {
        double scale = q / std::sqrt(1.0 - 2.0 / kPi);
        for (double& v : eps) v = scale * std::fabs(rng.normal());
        break;
      }
      case NoiseSpec::Kind::iid_exponential:
        for (double& v : eps) v = q * rng.exponential();
        break;
      case NoiseSpec::Kind::rounding:
        break;
    }
  };

  std::vector<double> partial(static_cast<std::size_t>(reps), 0.0);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t rep) {
    Rng rng(derive_seed(seed, rep));
    std::vector<double> eps(m + 1);

    // First grid: minimum over points 0..nh-1, Brownian motion from 0.
    draw_noise(rng, eps);
    double b = 0.0;
    double min_a = eps[0];
    for (std::size_t i = 1; i < m; ++i) {
      b += sq_dt * rng.normal();
      min_a = std::min(min_a, sigma * b + eps[i]);
    }

    // Second grid: minimum over points 1..nh of an independent motion.
    draw_noise(rng, eps);
    b = 0.0;
    double min_b = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= m; ++i) {
      b += sq_dt * rng.normal();
      min_b = std::min(min_b, sigma * b + eps[i]);
    }

    double d = min_a - min_b;
    partial[rep] = d * d;
  });

  double mean = 0.0;
  for (double v : partial) mean += v;
  mean /= static_cast<double>(reps);
  return kPrefactor * mean / h_n;
}

}  // namespace lobjump
