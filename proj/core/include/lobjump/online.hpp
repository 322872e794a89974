#pragma once

#include <optional>
#include <vector>

#include "lobjump/jump_test.hpp"
#include "lobjump/series.hpp"
#include "lobjump/spot_vol.hpp"

namespace lobjump {

struct OnlineConfig {
  long n = 23400;       // expected observations per session
  int block_count = 0;  // fixed block partition of [0,1]
  double alpha = 0.05;
  Side side = Side::lower_bounded;
  SpotVolConfig spot;   // K_n, truncation, correction (psi_inverse not
                        // supported online)
  SessionInfo session;
};

// Streaming state. Block extrema finalize as time crosses block
// boundaries; the volatility estimate for a block is frozen when the
// block is entered and uses completed blocks only.
struct DetectorState {
  OnlineConfig config;
  double centering = 0.0;     // B for the configured block count
  double loglog_term = 0.0;   // log(-log(1-alpha))
  int current_block = -1;
  double running = 0.0;
  bool running_any = false;
  std::vector<double> finalized;
  std::vector<bool> usable;
  double last_time = -1.0;
  double sigma_sq = 0.0;
  bool sigma_ready = false;
  bool fired_this_block = false;
  std::vector<JumpEvent> events;
};

DetectorState detector_new(const OnlineConfig& config);

// Feeds one observation; returns an event the first time the running
// comparison with the previous block's extremum crosses the calibrated
// threshold (at most once per block). Observations sitting exactly on a
// block boundary belong to no block and are skipped. Throws on
// out-of-order timestamps.
std::optional<JumpEvent> push(DetectorState& state, double time,
                              double value);

// Finalizes the block in progress; afterwards state.finalized/usable
// cover every block up to the last one with data.
void finalize_session(DetectorState& state);

// Block-average detector on mid quotes: the standardized difference of
// adjacent index-based blocks of nh observations becomes available at
// the final observation of the newer block and is compared against a
// precomputed critical value (e.g. a bootstrap quantile).
struct MmnOnlineConfig {
  int nh = 30;
  double q_hat = 0.0;
  std::vector<double> inst_vol;  // equispaced, length n+1
  double threshold = 0.0;
  SessionInfo session;
};

std::optional<JumpEvent> mmn_first_detection(const QuoteSeries& mid,
                                             const MmnOnlineConfig& config);

struct RaceConfig {
  OnlineConfig one_sided;  // applied to ask; bid runs the mirrored side
  MmnOnlineConfig mmn;
};

struct RaceRecord {
  std::optional<JumpEvent> ask;
  std::optional<JumpEvent> bid;
  std::optional<JumpEvent> mmn;
  // True when some one-sided detector fired and the benchmark did too;
  // a one-sided jump normally wakes only the matching side.
  bool both_detected = false;
  // Benchmark detection time minus the earliest one-sided detection
  // time, in wall-clock seconds; positive means the one-sided side was
  // faster. Only meaningful when both_detected.
  double advantage_seconds = 0.0;
};

RaceRecord race(const QuoteSeries& mid, const QuoteSeries& ask,
                const QuoteSeries& bid, const RaceConfig& config);

}  // namespace lobjump
