#pragma once

#include <string>
#include <vector>

namespace lobjump {

// Which side of the order book a series comes from. The noise in ask
// quotes is bounded below (observed value >= efficient price), in bid
// quotes bounded above, and mid quotes carry ordinary two-sided noise.
enum class Side { lower_bounded, upper_bounded, two_sided };

struct SessionInfo {
  // Wall-clock bounds of the session in seconds after midnight; used
  // only for reporting latencies in physical units.
  double wall_clock_start = 0.0;
  double wall_clock_end = 0.0;

  double wall_seconds() const { return wall_clock_end - wall_clock_start; }
};

// A timestamped series of log-prices from one side of the book.
// Times are fractions of the session in [0,1], strictly increasing.
struct QuoteSeries {
  std::vector<double> times;
  std::vector<double> values;
  Side side = Side::two_sided;
  SessionInfo session;

  std::size_t size() const { return values.size(); }
  // As in "n+1 observations"; the sampling frequency parameter.
  long n() const { return static_cast<long>(values.size()) - 1; }

  // Throws std::invalid_argument when the invariants fail
  // (monotone times inside [0,1], finite values, length >= 2).
  void validate() const;
};

// Partition of (0,1) into block_count equal blocks. Block k owns the
// observation indices whose time lies in the open interval
// (k*h, (k+1)*h); an observation sitting exactly on a boundary belongs
// to no block.
struct BlockGrid {
  int block_count = 0;
  double block_length = 0.0;
  std::vector<std::vector<int>> index_sets;
};

struct GridTarget {
  enum class Kind { block_count, observations_per_block };
  Kind kind;
  int value;

  static GridTarget blocks(int count) {
    return {Kind::block_count, count};
  }
  static GridTarget per_block(int obs) {
    return {Kind::observations_per_block, obs};
  }
};

// Builds the block partition. With an observations_per_block target B,
// block_count = floor(#observations / B) and the residual observations
// attach to the last block. Index sets are always computed from times,
// so irregular sampling is supported. Throws when fewer than 2 blocks
// result.
BlockGrid build_block_grid(const QuoteSeries& series, GridTarget target);

// Block-wise extrema m_k: minima for lower-bounded series, maxima for
// upper-bounded ones (computed as the negated minimum of the negated
// values). Blocks with no observations get the nearest nonempty
// neighbor's value and are flagged; downstream statistics skip them.
struct ExtremaSeries {
  std::vector<double> values;
  int block_count = 0;
  double block_length = 0.0;
  Side side = Side::lower_bounded;
  std::vector<bool> filled;      // true where the block was empty
  std::vector<int> empty_blocks; // indices of filled blocks

  bool usable(int k) const { return !filled[static_cast<std::size_t>(k)]; }
};

ExtremaSeries local_extrema(const QuoteSeries& series, const BlockGrid& grid);

// Block extrema over consecutive runs of exactly obs_per_block
// observations, trailing remainder dropped. Bootstrap-calibrated tests
// block thinned series this way: the occupancy stays fixed and the time
// boundaries float with the sampling, so no block is ever empty.
// block_length is the nominal 1/block_count.
ExtremaSeries extrema_by_count(const QuoteSeries& series, int obs_per_block);

enum class WindowDirection { before, after };

struct WindowExtremum {
  double value = 0.0;
  bool shrunk = false; // window hit the sample boundary
  int lo = 0;          // inclusive index range actually used
  int hi = 0;
};

// Windowed extremum around tau over window_obs observations. The
// anchor is the last index with time <= tau (for equispaced times i/n
// this is floor(n*tau)); direction=after scans the window_obs indices
// after the anchor, direction=before the window_obs indices up to and
// including it. Windows that would leave the sample shrink and are
// flagged. Throws when the window is empty.
WindowExtremum extrema_window(const QuoteSeries& series, double tau,
                              int window_obs, WindowDirection direction);

}  // namespace lobjump
