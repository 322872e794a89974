#include "lobjump/evt.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>

namespace lobjump::evt {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

double gumbel_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("gumbel_quantile: alpha outside (0,1)");
  return -std::log(-std::log1p(-alpha));
}

double global_centering(int block_count) {
  if (block_count < 3)
    throw std::invalid_argument("global_centering: block_count < 3");
  double two_n = 2.0 * block_count - 2.0;
  return 2.0 * std::log(two_n) - std::log(kPi * std::log(two_n));
}

double global_rate(int block_count) {
  if (block_count < 3)
    throw std::invalid_argument("global_rate: block_count < 3");
  double two_n = 2.0 * block_count - 2.0;
  return std::sqrt(block_count * 2.0 * std::log(two_n));
}

int asymptotic_block_count(std::size_t n) {
  if (n < 8) throw std::invalid_argument("asymptotic_block_count: n too small");
  double n23 = std::pow(static_cast<double>(n), -2.0 / 3.0);
  double h = 1.3 * n23;
  for (int it = 0; it < 20; ++it) {
    h = 2.0 * std::log(2.0 / h - 2.0) * n23;
  }
  int bc = static_cast<int>(std::lround(1.0 / h));
  return bc < 3 ? 3 : bc;
}

GumbelCalibration halfnorm_max_calibration(std::size_t N) {
  if (N < 2) throw std::invalid_argument("halfnorm_max_calibration: N < 2");
  double s = std::sqrt(2.0 * std::log(2.0 * static_cast<double>(N)));
  GumbelCalibration c;
  c.N = N;
  c.a_N = 1.0 / s;
  c.b_N = s - std::log(kPi * std::log(2.0 * static_cast<double>(N))) / s;
  return c;
}

double halfnorm_diff_density(double x) {
  double ax = std::fabs(x);
  return std::exp(-ax * ax / 4.0) * std::erfc(ax / 2.0) / std::sqrt(kPi);
}

double halfnorm_diff_survival(double x) {
  if (!(x >= 0.0))
    throw std::invalid_argument("halfnorm_diff_survival: x < 0");
  // The integrand is dominated by e^{-t^2/4} e^{-t^2/4} = e^{-t^2/2};
  // past x+12 the remaining mass is < 1e-30.
  using boost::math::quadrature::gauss_kronrod;
  auto g = [](double t) { return halfnorm_diff_density(t); };
  double upper = x + 12.0;
  return gauss_kronrod<double, 15>::integrate(g, x, upper, 15, 1e-10);
}

double local_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("local_quantile: alpha outside (0,1)");
  // P(|D| > q) = 2 S(q) is strictly decreasing from 1 at q=0; bracket
  // and bisect. 12 is far beyond any attainable quantile (mass < 1e-30).
  double lo = 0.0, hi = 12.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (2.0 * halfnorm_diff_survival(mid) > alpha)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace lobjump::evt
