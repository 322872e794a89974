#include "lobjump/online.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lobjump/evt.hpp"
#include "lobjump/lm_baseline.hpp"

namespace lobjump {

namespace {

double wall_or_session(const SessionInfo& session, double t) {
  return session.wall_clock_start + t * session.wall_seconds();
}

double latency_units(const SessionInfo& session, double dt) {
  double w = session.wall_seconds();
  return w > 0.0 ? dt * w : dt;
}

void finalize_block(DetectorState& state) {
  state.finalized.push_back(state.running_any ? state.running
                            : (state.finalized.empty()
                                   ? 0.0
                                   : state.finalized.back()));
  state.usable.push_back(state.running_any);
  state.running_any = false;
}

// Pre-window estimate over completed blocks, frozen for the block being
// entered. Mirrors the offline window rule with the same scaling.
void refresh_sigma(DetectorState& state, int k) {
  const SpotVolConfig& cfg = state.config.spot;
  double h = 1.0 / state.config.block_count;
  double u_n = cfg.truncation
                   ? cfg.truncation->beta_tr *
                         std::pow(h, cfg.truncation->kappa)
                   : 0.0;
  int lo = std::max(k - cfg.K_n, 1);
  int hi = std::min(k - 1, static_cast<int>(state.finalized.size()) - 1);
  double sum = 0.0;
  int cnt = 0;
  for (int r = lo; r <= hi; ++r) {
    std::size_t ru = static_cast<std::size_t>(r);
    if (!state.usable[ru] || !state.usable[ru - 1]) continue;
    double d = state.finalized[ru] - state.finalized[ru - 1];
    if (cfg.truncation && std::fabs(d) > u_n) continue;
    sum += d * d;
    ++cnt;
  }
  if (cnt == 0) {
    state.sigma_ready = false;
    return;
  }
  double prefactor = 1.0 / half_normal_diff_variance();
  double est = prefactor * state.config.block_count * sum / cnt;
  if (cfg.correction.kind == CorrectionSpec::Kind::constant_factor)
    est *= cfg.correction.factor;
  state.sigma_sq = est;
  state.sigma_ready = est > 0.0;
}

}  // namespace

DetectorState detector_new(const OnlineConfig& config) {
  if (config.n < 2) throw std::invalid_argument("detector: n < 2");
  if (config.block_count < 3)
    throw std::invalid_argument("detector: block_count < 3");
  if (!(config.alpha > 0.0 && config.alpha < 1.0))
    throw std::invalid_argument("detector: alpha outside (0,1)");
  if (config.side == Side::two_sided)
    throw std::invalid_argument("detector: side must be one-sided");
  if (config.spot.correction.kind == CorrectionSpec::Kind::psi_inverse)
    throw std::invalid_argument("detector: psi_inverse not supported online");

  DetectorState state;
  state.config = config;
  state.centering = evt::global_centering(config.block_count);
  state.loglog_term = std::log(-std::log1p(-config.alpha));
  return state;
}

std::optional<JumpEvent> push(DetectorState& state, double time,
                              double value) {
  if (time < state.last_time)
    throw std::invalid_argument("detector: out-of-order timestamp");
  state.last_time = time;

  const int bc = state.config.block_count;
  double u = time * bc;
  double fl = std::floor(u);
  if (u == fl) return std::nullopt;  // boundary point, belongs to no block
  int k = static_cast<int>(fl);
  if (k < 0 || k >= bc) return std::nullopt;

  if (k > state.current_block) {
    if (state.current_block >= 0) finalize_block(state);
    // Blocks skipped entirely stay empty and unusable.
    for (int b = state.current_block + 1; b < k; ++b) finalize_block(state);
    state.current_block = k;
    state.fired_this_block = false;
    refresh_sigma(state, k);
  }

  const bool min_side = state.config.side == Side::lower_bounded;
  double m = min_side ? value : -value;
  if (!state.running_any || m < state.running) {
    state.running = m;
    state.running_any = true;
  }

  if (state.fired_this_block || !state.sigma_ready || k < 1)
    return std::nullopt;
  std::size_t prev = static_cast<std::size_t>(k) - 1;
  if (prev >= state.usable.size() || !state.usable[prev])
    return std::nullopt;

  // finalized[] is stored on the minimum scale (values negated for the
  // upper-bounded side), so one comparison covers both sides.
  double prev_extremum = state.finalized[prev];
  double rate = std::cbrt(static_cast<double>(state.config.n));
  double threshold = std::sqrt(state.sigma_sq) *
                     (state.loglog_term - state.centering) / rate;
  double diff = m - prev_extremum;
  if (diff < threshold) {
    state.fired_this_block = true;
    JumpEvent event;
    event.session_time = time;
    event.wall_clock = wall_or_session(state.config.session, time);
    event.size = min_side ? diff : -diff;
    event.direction = min_side ? -1 : 1;
    event.block = k;
    event.interval_lo = static_cast<double>(k) / bc;
    event.interval_hi = time;
    event.latency_seconds =
        latency_units(state.config.session, time - event.interval_lo);
    event.alpha = state.config.alpha;
    state.events.push_back(event);
    return event;
  }
  return std::nullopt;
}

void finalize_session(DetectorState& state) {
  if (state.current_block >= 0) {
    finalize_block(state);
    state.current_block = -1;
  }
}

std::optional<JumpEvent> mmn_first_detection(const QuoteSeries& mid,
                                             const MmnOnlineConfig& config) {
  if (config.nh < 2) throw std::invalid_argument("mmn detector: nh < 2");
  if (!(config.threshold > 0.0))
    throw std::invalid_argument("mmn detector: threshold must be positive");
  const std::size_t len = mid.values.size();
  const std::size_t nh = static_cast<std::size_t>(config.nh);
  const int blocks = static_cast<int>(len / nh);
  if (blocks < 2) return std::nullopt;

  const double c_sq =
      static_cast<double>(config.nh) * config.nh / mid.n();
  const std::size_t last_vol = config.inst_vol.size() - 1;

  double prev_avg = 0.0;
  for (std::size_t i = 0; i < nh; ++i) prev_avg += mid.values[i];
  prev_avg /= config.nh;

  for (int k = 1; k < blocks; ++k) {
    double avg = 0.0;
    std::size_t base = static_cast<std::size_t>(k) * nh;
    for (std::size_t i = 0; i < nh; ++i) avg += mid.values[base + i];
    avg /= config.nh;

    std::size_t vi = std::min(base, last_vol);
    double sig = config.inst_vol[vi];
    double denom = std::sqrt((2.0 / 3.0) * sig * sig * c_sq +
                             2.0 * config.q_hat * config.q_hat);
    double stat = std::fabs(avg - prev_avg) / denom;
    if (stat > config.threshold) {
      std::size_t at = base + nh - 1;  // average complete at block end
      JumpEvent event;
      event.session_time = mid.times[at];
      event.wall_clock = wall_or_session(config.session, event.session_time);
      event.size = avg - prev_avg;
      event.direction = event.size > 0.0 ? 1 : -1;
      event.block = k;
      event.interval_lo = mid.times[base];
      event.interval_hi = mid.times[at];
      event.latency_seconds =
          latency_units(config.session, event.session_time - mid.times[base]);
      event.alpha = 0.0;
      return event;
    }
    prev_avg = avg;
  }
  return std::nullopt;
}

RaceRecord race(const QuoteSeries& mid, const QuoteSeries& ask,
                const QuoteSeries& bid, const RaceConfig& config) {
  if (mid.values.empty() || ask.values.empty() || bid.values.empty())
    throw std::invalid_argument("race: empty stream");

  RaceRecord record;

  OnlineConfig ask_cfg = config.one_sided;
  ask_cfg.side = Side::lower_bounded;
  DetectorState ask_state = detector_new(ask_cfg);
  for (std::size_t i = 0; i < ask.values.size(); ++i) {
    auto e = push(ask_state, ask.times[i], ask.values[i]);
    if (e) {
      record.ask = e;
      break;
    }
  }

  OnlineConfig bid_cfg = config.one_sided;
  bid_cfg.side = Side::upper_bounded;
  DetectorState bid_state = detector_new(bid_cfg);
  for (std::size_t i = 0; i < bid.values.size(); ++i) {
    auto e = push(bid_state, bid.times[i], bid.values[i]);
    if (e) {
      record.bid = e;
      break;
    }
  }

  record.mmn = mmn_first_detection(mid, config.mmn);

  const bool one_sided_fired = record.ask.has_value() || record.bid.has_value();
  record.both_detected = one_sided_fired && record.mmn.has_value();
  if (record.both_detected) {
    double one_sided_time = std::numeric_limits<double>::infinity();
    if (record.ask) one_sided_time = record.ask->wall_clock;
    if (record.bid)
      one_sided_time = std::min(one_sided_time, record.bid->wall_clock);
    record.advantage_seconds = record.mmn->wall_clock - one_sided_time;
  }
  return record;
}

}  // namespace lobjump
