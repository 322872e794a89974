#include "lobjump/series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lobjump {

void QuoteSeries::validate() const {
  if (times.size() != values.size())
    throw std::invalid_argument("QuoteSeries: times/values length mismatch");
  if (values.size() < 2)
    throw std::invalid_argument("QuoteSeries: need at least 2 observations");
  double prev = -1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    double t = times[i];
    if (!(t >= 0.0 && t <= 1.0))
      throw std::invalid_argument("QuoteSeries: time outside [0,1]");
    if (t <= prev)
      throw std::invalid_argument("QuoteSeries: times not strictly increasing");
    if (!std::isfinite(values[i]))
      throw std::invalid_argument("QuoteSeries: non-finite value");
    prev = t;
  }
}

BlockGrid build_block_grid(const QuoteSeries& series, GridTarget target) {
  const long n = series.n();
  if (n < 1) throw std::invalid_argument("build_block_grid: empty series");

  int block_count = 0;
  if (target.kind == GridTarget::Kind::block_count) {
    block_count = target.value;
  } else {
    if (target.value < 1)
      throw std::invalid_argument("build_block_grid: observations_per_block < 1");
    block_count = static_cast<int>(series.values.size() /
                                   static_cast<std::size_t>(target.value));
  }
  if (block_count < 2)
    throw std::invalid_argument(
        "build_block_grid: insufficient observations for at least 2 blocks");

  BlockGrid grid;
  grid.block_count = block_count;
  grid.block_length = 1.0 / block_count;
  grid.index_sets.assign(static_cast<std::size_t>(block_count), {});

  for (std::size_t i = 0; i < series.times.size(); ++i) {
    double u = series.times[i] * block_count;
    double fl = std::floor(u);
    if (u == fl) continue; // boundary points belong to no block
    int k = static_cast<int>(fl);
    if (k < 0 || k >= block_count) continue;
    grid.index_sets[static_cast<std::size_t>(k)].push_back(static_cast<int>(i));
  }

  // With an observations_per_block target the residual past the last
  // full block lands in the last block automatically: its interval
  // stretches to time 1.
  return grid;
}

ExtremaSeries local_extrema(const QuoteSeries& series, const BlockGrid& grid) {
  if (grid.block_count < 1)
    throw std::invalid_argument("local_extrema: empty grid");

  const bool want_max = series.side == Side::upper_bounded;
  const double inf = std::numeric_limits<double>::infinity();

  ExtremaSeries out;
  out.block_count = grid.block_count;
  out.block_length = grid.block_length;
  out.side = series.side;
  out.values.assign(static_cast<std::size_t>(grid.block_count), inf);
  out.filled.assign(static_cast<std::size_t>(grid.block_count), false);

  for (int k = 0; k < grid.block_count; ++k) {
    const auto& idx = grid.index_sets[static_cast<std::size_t>(k)];
    if (idx.empty()) {
      out.filled[static_cast<std::size_t>(k)] = true;
      out.empty_blocks.push_back(k);
      continue;
    }
    double m = inf;
    for (int i : idx) {
      double v = series.values[static_cast<std::size_t>(i)];
      if (want_max) v = -v;
      m = std::min(m, v);
    }
    out.values[static_cast<std::size_t>(k)] = want_max ? -m : m;
  }

  if (out.empty_blocks.size() == out.values.size())
    throw std::runtime_error("local_extrema: all blocks empty");

  // Fill empty blocks with the nearest nonempty neighbor's value so the
  // series stays usable as a path; the flags keep them out of maxima.
  for (int k : out.empty_blocks) {
    for (int d = 1; d < grid.block_count; ++d) {
      int lo = k - d, hi = k + d;
      if (lo >= 0 && !out.filled[static_cast<std::size_t>(lo)]) {
        out.values[static_cast<std::size_t>(k)] =
            out.values[static_cast<std::size_t>(lo)];
        break;
      }
      if (hi < grid.block_count && !out.filled[static_cast<std::size_t>(hi)]) {
        out.values[static_cast<std::size_t>(k)] =
            out.values[static_cast<std::size_t>(hi)];
        break;
      }
    }
  }

  return out;
}

ExtremaSeries extrema_by_count(const QuoteSeries& series, int obs_per_block) {
  if (obs_per_block < 1)
    throw std::invalid_argument("extrema_by_count: obs_per_block < 1");
  const std::size_t per = static_cast<std::size_t>(obs_per_block);
  const int bc = static_cast<int>(series.values.size() / per);
  if (bc < 2)
    throw std::invalid_argument("extrema_by_count: fewer than 2 blocks");

  const bool want_max = series.side == Side::upper_bounded;

  ExtremaSeries out;
  out.block_count = bc;
  out.block_length = 1.0 / static_cast<double>(bc);
  out.side = series.side;
  out.values.assign(static_cast<std::size_t>(bc), 0.0);
  out.filled.assign(static_cast<std::size_t>(bc), false);

  for (int k = 0; k < bc; ++k) {
    const std::size_t base = static_cast<std::size_t>(k) * per;
    double m = series.values[base];
    if (want_max) m = -m;
    for (std::size_t i = 1; i < per; ++i) {
      double v = series.values[base + i];
      if (want_max) v = -v;
      m = std::min(m, v);
    }
    out.values[static_cast<std::size_t>(k)] = want_max ? -m : m;
  }
  return out;
}

WindowExtremum extrema_window(const QuoteSeries& series, double tau,
                              int window_obs, WindowDirection direction) {
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("extrema_window: tau outside (0,1)");
  if (window_obs < 1)
    throw std::invalid_argument("extrema_window: window_obs < 1");

  const long len = static_cast<long>(series.values.size());
  // Last index with time <= tau; floor(n*tau) for equispaced times.
  auto it = std::upper_bound(series.times.begin(), series.times.end(), tau);
  long anchor = static_cast<long>(it - series.times.begin()) - 1;

  long lo, hi;
  if (direction == WindowDirection::after) {
    lo = anchor + 1;
    hi = anchor + window_obs;
  } else {
    lo = anchor - window_obs + 1;
    hi = anchor;
  }

  bool shrunk = false;
  if (lo < 0) { lo = 0; shrunk = true; }
  if (hi > len - 1) { hi = len - 1; shrunk = true; }
  if (lo > hi) throw std::runtime_error("extrema_window: empty window");

  const bool want_max = series.side == Side::upper_bounded;
  double m = std::numeric_limits<double>::infinity();
  for (long i = lo; i <= hi; ++i) {
    double v = series.values[static_cast<std::size_t>(i)];
    if (want_max) v = -v;
    m = std::min(m, v);
  }

  WindowExtremum w;
  w.value = want_max ? -m : m;
  w.shrunk = shrunk;
  w.lo = static_cast<int>(lo);
  w.hi = static_cast<int>(hi);
  return w;
}

}  // namespace lobjump
