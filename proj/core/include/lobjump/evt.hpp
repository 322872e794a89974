#pragma once

#include <cstddef>

namespace lobjump::evt {

// (1-alpha) quantile of the standard Gumbel law exp(-e^{-x}).
double gumbel_quantile(double alpha);

// Centering constant for the global maximum statistic over a grid of
// block_count blocks: B = 2 log(2 block_count - 2) - log(pi log(2 block_count - 2)).
double global_centering(int block_count);

// Scale that standardizes the raw maximum statistic:
// r = h^{-1/2} sqrt(2 log(2 h^{-1} - 2)) with h = 1/block_count.
// When the block length satisfies the asymptotic relation
// h = 2 log(2 h^{-1} - 2) n^{-2/3} this equals n^{1/3}, the rate the
// limit theorem is stated with; written this way it stays calibrated
// for any block count actually used.
double global_rate(int block_count);

// Solves h = 2 log(2/h - 2) * n^{-2/3} by fixed-point iteration
// (20 rounds from h0 = 1.3 n^{-2/3}) and returns the rounded block
// count; the choice under which global_rate(bc) = n^{1/3} holds.
int asymptotic_block_count(std::size_t n);

// Scale/centering pair for the maximum of N absolute differences of
// independent standard half-normal variables:
//   a_N = 1/sqrt(2 log(2N)),
//   b_N = sqrt(2 log(2N)) - log(pi log(2N)) / sqrt(2 log(2N)).
// (max - b_N)/a_N converges to the standard Gumbel law. Note
// b_N / a_N = global_centering(N + 1).
struct GumbelCalibration {
  std::size_t N = 0;
  double a_N = 0.0;
  double b_N = 0.0;
};
GumbelCalibration halfnorm_max_calibration(std::size_t N);

// Density of D = V1 - V2 for independent standard half-normals:
// g(x) = (1/sqrt(pi)) e^{-x^2/4} erfc(|x|/2), symmetric in x.
double halfnorm_diff_density(double x);

// Upper tail of the same law, S(x) = P(D > x) for x >= 0, computed by
// adaptive quadrature (absolute tolerance 1e-10, domain truncated at
// x + 12 where the integrand is below 1e-30). S(0) = 1/2, and
// P(|D| > x) = 2 S(x).
double halfnorm_diff_survival(double x);

// Quantile of |D|: the q with P(|D| > q) = alpha, found by bisection
// on the quadrature survival.
double local_quantile(double alpha);

}  // namespace lobjump::evt
