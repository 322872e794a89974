#include "lobjump/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace lobjump {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

// Nearest tick multiple, floored at one tick: s v ([x/s] s).
double round_to_tick(double price, double tick) {
  double rounded = std::round(price / tick) * tick;
  return rounded < tick ? tick : rounded;
}
}  // namespace

PathSet simulate_path(const SimConfig& config, Rng& rng, double x0) {
  if (config.n < 2) throw std::invalid_argument("simulate_path: n < 2");
  if (!(config.sigma0_sq > 0.0))
    throw std::invalid_argument("simulate_path: sigma0_sq <= 0");

  const long n = config.n;
  const double dt = 1.0 / static_cast<double>(n);
  const double sq_dt = std::sqrt(dt);
  const double rho = config.leverage;
  const double rho_perp = std::sqrt(1.0 - rho * rho);

  PathSet path;
  path.X.resize(static_cast<std::size_t>(n) + 1);
  path.sigma.resize(static_cast<std::size_t>(n) + 1);

  double s2 = config.sigma0_sq;
  double x = x0;
  path.X[0] = x;
  path.sigma[0] = std::sqrt(s2);

  for (long i = 0; i < n; ++i) {
    double dw = rng.normal() * sq_dt;
    double db = rho * dw + rho_perp * rng.normal() * sq_dt;
    double t = static_cast<double>(i) * dt;
    double sig = std::sqrt(s2);

    x += config.drift * dt + seasonal_factor(t) * sig * dw;
    s2 += config.mr_speed * (config.mr_level - s2) * dt +
          config.vol_of_vol * sig * db;
    if (s2 < 1e-10) s2 = 1e-10;

    path.X[static_cast<std::size_t>(i) + 1] = x;
    path.sigma[static_cast<std::size_t>(i) + 1] = std::sqrt(s2);
  }
  return path;
}

void inject_jump(PathSet& path, const Jump& jump) {
  if (!(jump.time > 0.0 && jump.time < 1.0))
    throw std::invalid_argument("inject_jump: time outside (0,1)");
  if (jump.size == 0.0) return;
  const long n = static_cast<long>(path.X.size()) - 1;
  for (long i = 0; i <= n; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(n);
    if (t >= jump.time) path.X[static_cast<std::size_t>(i)] += jump.size;
  }
}

ObservationSet apply_noise(const PathSet& path, const NoiseSpec& spec,
                           Rng& rng) {
  const std::size_t len = path.X.size();
  const long n = static_cast<long>(len) - 1;
  if (n < 1) throw std::invalid_argument("apply_noise: empty path");
  if (spec.q < 0.0) throw std::invalid_argument("apply_noise: q < 0");

  std::vector<double> mid_vals(len), noise(len);

  switch (spec.kind) {
    case NoiseSpec::Kind::ar1_gaussian: {
      double phi = spec.phi;
      double stat_sd =
          spec.q > 0.0 ? spec.q / std::sqrt(1.0 - phi * phi) : 0.0;
      double eps = stat_sd * rng.normal();
      noise[0] = eps;
      for (std::size_t i = 1; i < len; ++i) {
        eps = phi * eps + spec.q * rng.normal();
        noise[i] = eps;
      }
      for (std::size_t i = 0; i < len; ++i) mid_vals[i] = path.X[i] + noise[i];
      break;
    }
    case NoiseSpec::Kind::iid_gaussian: {
      for (std::size_t i = 0; i < len; ++i) {
        noise[i] = spec.q * rng.normal();
        mid_vals[i] = path.X[i] + noise[i];
      }
      break;
    }
    case NoiseSpec::Kind::iid_halfnormal: {
      // Shared draws: mid gets q eps, ask/bid get the matched-variance
      // half-normal (1-2/pi)^{-1/2} q |eps| on the full grid.
      const double scale = 1.0 / std::sqrt(1.0 - 2.0 / kPi);
      ObservationSet out;
      out.X = path.X;
      out.sigma = path.sigma;
      out.mid.side = Side::two_sided;
      out.ask.side = Side::lower_bounded;
      out.bid.side = Side::upper_bounded;
      for (std::size_t i = 0; i < len; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(n);
        double e = rng.normal();
        double one_sided = scale * spec.q * std::fabs(e);
        out.mid.times.push_back(t);
        out.mid.values.push_back(path.X[i] + spec.q * e);
        out.ask.times.push_back(t);
        out.ask.values.push_back(path.X[i] + one_sided);
        out.bid.times.push_back(t);
        out.bid.values.push_back(path.X[i] - one_sided);
      }
      return out;
    }
    case NoiseSpec::Kind::iid_exponential: {
      // One-sided by construction; mid is the centered version.
      ObservationSet out;
      out.X = path.X;
      out.sigma = path.sigma;
      out.mid.side = Side::two_sided;
      out.ask.side = Side::lower_bounded;
      out.bid.side = Side::upper_bounded;
      for (std::size_t i = 0; i < len; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(n);
        double e = rng.exponential();
        out.mid.times.push_back(t);
        out.mid.values.push_back(path.X[i] + spec.q * (e - 1.0));
        out.ask.times.push_back(t);
        out.ask.values.push_back(path.X[i] + spec.q * e);
        out.bid.times.push_back(t);
        out.bid.values.push_back(path.X[i] - spec.q * e);
      }
      return out;
    }
    case NoiseSpec::Kind::rounding: {
      if (!(spec.tick > 0.0))
        throw std::invalid_argument("apply_noise: tick <= 0");
      for (std::size_t i = 0; i < len; ++i) {
        double eps = spec.q * rng.normal();
        double price = std::exp(path.X[i] + eps);
        mid_vals[i] = std::log(round_to_tick(price, spec.tick));
        noise[i] = mid_vals[i] - path.X[i];
      }
      break;
    }
  }

  // Implicit one-sided sampling: ask keeps Z_i > X, bid keeps Z_i < X;
  // exact ties go to the ask.
  ObservationSet out;
  out.X = path.X;
  out.sigma = path.sigma;
  out.mid.side = Side::two_sided;
  out.ask.side = Side::lower_bounded;
  out.bid.side = Side::upper_bounded;
  for (std::size_t i = 0; i < len; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(n);
    out.mid.times.push_back(t);
    out.mid.values.push_back(mid_vals[i]);
    if (noise[i] >= 0.0) {
      out.ask.times.push_back(t);
      out.ask.values.push_back(mid_vals[i]);
    } else {
      out.bid.times.push_back(t);
      out.bid.values.push_back(mid_vals[i]);
    }
  }
  return out;
}

ObservationSet simulate_session(const SessionSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  PathSet path = simulate_path(spec.sim, rng, spec.x0);
  if (spec.jump && spec.jump->size != 0.0) inject_jump(path, *spec.jump);
  ObservationSet obs = apply_noise(path, spec.noise, rng);
  obs.jump = spec.jump;
  return obs;
}

}  // namespace lobjump
