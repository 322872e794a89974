#pragma once

#include <array>
#include <string>
#include <vector>

#include "lobjump/jump_test.hpp"
#include "lobjump/online.hpp"
#include "lobjump/series.hpp"

namespace lobjump {

// Interchange CSV: header `time_sec,ask_price,bid_price`, time in
// seconds after midnight, prices in currency units. The lobster format
// reads a level-1 orderbook file (ask price, ask size, bid price, bid
// size; integer prices scaled by 10^4) paired with its message file
// for the timestamps; pass either file of the pair, the sibling name
// is derived by swapping "message"/"orderbook".
enum class QuoteFormat { csv, lobster };

struct QuoteFile {
  QuoteSeries ask;  // log ask quotes, lower bounded
  QuoteSeries bid;  // log bid quotes, upper bounded
  QuoteSeries mid;  // log of the price-level mid quote, two sided
  // 1-based line numbers of rows with ask < bid; the rows are kept.
  std::vector<long> crossed_lines;
  // Rows superseded by a later row with the same timestamp (the last
  // record per timestamp wins).
  long duplicate_timestamps = 0;
};

// Times are stored normalized to [0,1] over the file's span with the
// wall-clock bounds kept in each series' session info.
QuoteFile load_quotes(const std::string& path,
                      QuoteFormat format = QuoteFormat::csv);

struct SessionCleanRules {
  double window_start = 34200.0;   // 09:30
  double window_end = 57600.0;     // 16:00
  double exclude_start = 34200.0;  // opening noise window
  double exclude_end = 34500.0;    // 09:35
  bool change_filter = true;

  void validate() const;  // windows ordered, exclusion inside session
};

// Keeps observations with wall-clock time in [window_start, window_end)
// minus [exclude_start, exclude_end), both inclusive at the start and
// exclusive at the end, then drops consecutive repeats of the value
// when change_filter is set and renormalizes times to [0,1] over the
// surviving window. Cleaning an already-cleaned series is the identity.
// Wall-clock times are reconstructed from the session info; a series
// without one is read as raw seconds after midnight.
QuoteSeries clean_session(const QuoteSeries& series,
                          const SessionCleanRules& rules = {});

struct IntervalSplit {
  // Segment boundaries in seconds after midnight: 09:35, then hourly
  // from 10:00 to 16:00.
  static constexpr std::array<double, 8> boundaries = {
      34500.0, 36000.0, 39600.0, 43200.0, 46800.0, 50400.0, 54000.0, 57600.0};

  std::vector<QuoteSeries> segments;  // 7, times renormalized per segment
  std::vector<bool> empty;
};

// Half-open assignment [lo, hi): a record exactly on an interior
// boundary opens the later segment. Observations outside all segments
// are ignored.
IntervalSplit split_intervals(const QuoteSeries& series);

struct AcfDiagnostic {
  int max_lag = 0;
  // Cross-day medians of the per-day sample autocorrelations of the
  // first differences; index = lag, entry 0 is always 1.
  std::vector<double> median_acf;
  std::vector<std::vector<double>> daily_acf;

  std::string to_csv() const;  // header lag,median_acf
};

AcfDiagnostic acf_median_diagnostic(const std::vector<QuoteSeries>& days,
                                    int max_lag);

// Report serialization: JSON objects for single reports, JSON lines
// for event streams, CSV elsewhere.
std::string report_json(const GlobalTestReport& report);
std::string report_json(const LocalTestReport& report);
std::string race_json(const RaceRecord& record);
std::string events_jsonl(const std::vector<JumpEvent>& events);

// Single-series round trip with exact doubles (17 significant digits).
void save_series(const QuoteSeries& series, const std::string& path);
QuoteSeries load_series(const std::string& path);

}  // namespace lobjump
