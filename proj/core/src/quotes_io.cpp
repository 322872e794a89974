#include "lobjump/quotes_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace lobjump {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  const char* ws = " \t\r\n";
  const std::size_t lo = s.find_first_not_of(ws);
  if (lo == std::string::npos) return {};
  const std::size_t hi = s.find_last_not_of(ws);
  return s.substr(lo, hi - lo + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_fail(const std::string& path, long line,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& field, const std::string& path,
                    long line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size() || !std::isfinite(v)) {
      parse_fail(path, line, "bad number '" + field + "'");
    }
    return v;
  } catch (const std::logic_error&) {
    parse_fail(path, line, "bad number '" + field + "'");
  }
}

struct RawQuotes {
  std::vector<double> time_sec;
  std::vector<double> ask;
  std::vector<double> bid;
  std::vector<long> crossed_lines;
  long duplicates = 0;

  void push(double t, double a, double b, long line, const std::string& path) {
    if (a <= 0.0 || b <= 0.0) parse_fail(path, line, "non-positive price");
    if (a < b) crossed_lines.push_back(line);
    if (!time_sec.empty()) {
      if (t < time_sec.back()) parse_fail(path, line, "time goes backwards");
      if (t == time_sec.back()) {
        // snapshot superseded within the same timestamp
        ask.back() = a;
        bid.back() = b;
        ++duplicates;
        return;
      }
    }
    time_sec.push_back(t);
    ask.push_back(a);
    bid.push_back(b);
  }
};

RawQuotes read_interchange_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  ++line_no;
  if (trim(line) != "time_sec,ask_price,bid_price") {
    parse_fail(path, line_no,
               "expected header time_sec,ask_price,bid_price");
  }
  RawQuotes raw;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 3) parse_fail(path, line_no, "expected 3 fields");
    const double t = parse_number(f[0], path, line_no);
    const double a = parse_number(f[1], path, line_no);
    const double b = parse_number(f[2], path, line_no);
    raw.push(t, a, b, line_no, path);
  }
  return raw;
}

std::string lobster_sibling(const std::string& path, const char* from,
                            const char* to) {
  const std::size_t pos = path.rfind(from);
  if (pos == std::string::npos) return {};
  std::string out = path;
  out.replace(pos, std::string(from).size(), to);
  return out;
}

RawQuotes read_lobster(const std::string& path) {
  std::string message = path;
  std::string orderbook = path;
  if (path.find("orderbook") != std::string::npos) {
    message = lobster_sibling(path, "orderbook", "message");
  } else if (path.find("message") != std::string::npos) {
    orderbook = lobster_sibling(path, "message", "orderbook");
  } else {
    throw std::invalid_argument(
        "lobster format needs a *message* / *orderbook* file pair: " + path);
  }
  std::ifstream msg(message);
  if (!msg) throw std::runtime_error("cannot open " + message);
  std::ifstream book(orderbook);
  if (!book) throw std::runtime_error("cannot open " + orderbook);

  RawQuotes raw;
  std::string mline;
  std::string bline;
  long line_no = 0;
  while (std::getline(msg, mline)) {
    ++line_no;
    if (trim(mline).empty()) continue;
    if (!std::getline(book, bline)) {
      parse_fail(orderbook, line_no, "fewer rows than the message file");
    }
    const std::vector<std::string> mf = split_csv(mline);
    const std::vector<std::string> bf = split_csv(bline);
    if (mf.empty()) parse_fail(message, line_no, "empty row");
    if (bf.size() < 4) parse_fail(orderbook, line_no, "expected 4+ fields");
    const double t = parse_number(mf[0], message, line_no);
    // integer price convention: currency units times 10^4
    const double a = parse_number(bf[0], orderbook, line_no) / 1e4;
    const double b = parse_number(bf[2], orderbook, line_no) / 1e4;
    raw.push(t, a, b, line_no, orderbook);
  }
  if (std::getline(book, bline) && !trim(bline).empty()) {
    parse_fail(orderbook, line_no + 1, "more rows than the message file");
  }
  return raw;
}

QuoteSeries make_series(const std::vector<double>& times,
                        std::vector<double> values, Side side,
                        SessionInfo session) {
  QuoteSeries s;
  s.times = times;
  s.values = std::move(values);
  s.side = side;
  s.session = session;
  return s;
}

// Wall-clock time of observation i: series cleaned to [0,1] carry
// their window in the session info, otherwise times are raw seconds.
double wall_time(const QuoteSeries& series, std::size_t i) {
  if (series.session.wall_seconds() > 0.0 && !series.times.empty() &&
      series.times.back() <= 1.0) {
    return series.session.wall_clock_start +
           series.times[i] * series.session.wall_seconds();
  }
  return series.times[i];
}

double acf_at_lag(const std::vector<double>& diffs, double mean, double c0,
                  int lag) {
  double c = 0.0;
  for (std::size_t i = 0; i + lag < diffs.size(); ++i) {
    c += (diffs[i] - mean) * (diffs[i + lag] - mean);
  }
  return c / c0;
}

double median_of(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

ordered_json event_json(const JumpEvent& e) {
  return ordered_json{
      {"session_time", e.session_time}, {"wall_clock", e.wall_clock},
      {"direction", e.direction},       {"size_estimate", e.size},
      {"block", e.block},               {"latency_seconds", e.latency_seconds},
      {"interval_lo", e.interval_lo},   {"interval_hi", e.interval_hi},
      {"alpha", e.alpha}};
}

const char* side_name(Side side) {
  switch (side) {
    case Side::lower_bounded:
      return "lower_bounded";
    case Side::upper_bounded:
      return "upper_bounded";
    case Side::two_sided:
      return "two_sided";
  }
  return "?";
}

Side side_from(const std::string& name) {
  if (name == "lower_bounded") return Side::lower_bounded;
  if (name == "upper_bounded") return Side::upper_bounded;
  if (name == "two_sided") return Side::two_sided;
  throw std::runtime_error("unknown side: " + name);
}

}  // namespace

QuoteFile load_quotes(const std::string& path, QuoteFormat format) {
  const RawQuotes raw = format == QuoteFormat::csv ? read_interchange_csv(path)
                                                   : read_lobster(path);
  if (raw.time_sec.size() < 2) {
    throw std::runtime_error(path + ": need at least 2 distinct timestamps");
  }
  const double t0 = raw.time_sec.front();
  const double span = raw.time_sec.back() - t0;
  std::vector<double> times(raw.time_sec.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    times[i] = (raw.time_sec[i] - t0) / span;
  }
  const SessionInfo session{t0, raw.time_sec.back()};

  std::vector<double> ask(times.size());
  std::vector<double> bid(times.size());
  std::vector<double> mid(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    ask[i] = std::log(raw.ask[i]);
    bid[i] = std::log(raw.bid[i]);
    mid[i] = std::log(0.5 * (raw.ask[i] + raw.bid[i]));
  }

  QuoteFile out;
  out.ask = make_series(times, std::move(ask), Side::lower_bounded, session);
  out.bid = make_series(times, std::move(bid), Side::upper_bounded, session);
  out.mid = make_series(times, std::move(mid), Side::two_sided, session);
  out.crossed_lines = raw.crossed_lines;
  out.duplicate_timestamps = raw.duplicates;
  return out;
}

void SessionCleanRules::validate() const {
  if (!(window_start < window_end)) {
    throw std::invalid_argument("SessionCleanRules: window order");
  }
  if (!(exclude_start <= exclude_end)) {
    throw std::invalid_argument("SessionCleanRules: exclusion order");
  }
  if (exclude_start < window_start || exclude_end > window_end) {
    throw std::invalid_argument(
        "SessionCleanRules: exclusion outside the session window");
  }
}

QuoteSeries clean_session(const QuoteSeries& series,
                          const SessionCleanRules& rules) {
  rules.validate();
  if (series.times.size() != series.values.size()) {
    throw std::invalid_argument("clean_session: times/values mismatch");
  }

  // Window left after an exclusion that covers the session opening.
  const double eff_start =
      (rules.exclude_start <= rules.window_start &&
       rules.exclude_end > rules.window_start)
          ? rules.exclude_end
          : rules.window_start;
  const double eff_span = rules.window_end - eff_start;
  if (eff_span <= 0.0) {
    throw std::invalid_argument("clean_session: exclusion leaves no window");
  }

  QuoteSeries out;
  out.side = series.side;
  out.session = SessionInfo{eff_start, rules.window_end};
  const bool already_normalized =
      series.session.wall_clock_start == eff_start &&
      series.session.wall_clock_end == rules.window_end &&
      (series.times.empty() || series.times.back() <= 1.0);

  bool have_last = false;
  double last_value = 0.0;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double wall = wall_time(series, i);
    if (wall < rules.window_start || wall >= rules.window_end) continue;
    if (wall >= rules.exclude_start && wall < rules.exclude_end) continue;
    if (rules.change_filter && have_last && series.values[i] == last_value) {
      continue;
    }
    // reuse normalized times verbatim so cleaning twice is the identity
    out.times.push_back(already_normalized ? series.times[i]
                                           : (wall - eff_start) / eff_span);
    out.values.push_back(series.values[i]);
    last_value = series.values[i];
    have_last = true;
  }
  if (out.values.size() < 2) {
    throw std::runtime_error("clean_session: empty result");
  }
  return out;
}

IntervalSplit split_intervals(const QuoteSeries& series) {
  IntervalSplit out;
  const std::size_t segments = IntervalSplit::boundaries.size() - 1;
  out.segments.resize(segments);
  out.empty.assign(segments, true);
  for (std::size_t seg = 0; seg < segments; ++seg) {
    out.segments[seg].side = series.side;
    out.segments[seg].session = SessionInfo{IntervalSplit::boundaries[seg],
                                            IntervalSplit::boundaries[seg + 1]};
  }
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double wall = wall_time(series, i);
    const auto it = std::upper_bound(IntervalSplit::boundaries.begin(),
                                     IntervalSplit::boundaries.end(), wall);
    if (it == IntervalSplit::boundaries.begin() ||
        it == IntervalSplit::boundaries.end()) {
      continue;  // outside the split windows
    }
    const std::size_t seg =
        static_cast<std::size_t>(it - IntervalSplit::boundaries.begin()) - 1;
    const double lo = IntervalSplit::boundaries[seg];
    const double hi = IntervalSplit::boundaries[seg + 1];
    out.segments[seg].times.push_back((wall - lo) / (hi - lo));
    out.segments[seg].values.push_back(series.values[i]);
    out.empty[seg] = false;
  }
  return out;
}

AcfDiagnostic acf_median_diagnostic(const std::vector<QuoteSeries>& days,
                                    int max_lag) {
  if (days.empty()) {
    throw std::invalid_argument("acf_median_diagnostic: no days");
  }
  if (max_lag < 1) {
    throw std::invalid_argument("acf_median_diagnostic: max_lag must be >= 1");
  }
  AcfDiagnostic out;
  out.max_lag = max_lag;
  for (std::size_t d = 0; d < days.size(); ++d) {
    const std::vector<double>& v = days[d].values;
    if (v.size() < static_cast<std::size_t>(max_lag) + 2) {
      throw std::invalid_argument("acf_median_diagnostic: day " +
                                  std::to_string(d) + " too short for lag " +
                                  std::to_string(max_lag));
    }
    std::vector<double> diffs(v.size() - 1);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) diffs[i] = v[i + 1] - v[i];
    double mean = 0.0;
    for (double x : diffs) mean += x;
    mean /= static_cast<double>(diffs.size());
    double c0 = 0.0;
    for (double x : diffs) c0 += (x - mean) * (x - mean);
    if (c0 == 0.0) {
      throw std::runtime_error("acf_median_diagnostic: day " +
                               std::to_string(d) + " has constant returns");
    }
    std::vector<double> acf(static_cast<std::size_t>(max_lag) + 1);
    acf[0] = 1.0;
    for (int lag = 1; lag <= max_lag; ++lag) {
      acf[static_cast<std::size_t>(lag)] = acf_at_lag(diffs, mean, c0, lag);
    }
    out.daily_acf.push_back(std::move(acf));
  }
  out.median_acf.resize(static_cast<std::size_t>(max_lag) + 1);
  for (int lag = 0; lag <= max_lag; ++lag) {
    std::vector<double> column;
    column.reserve(out.daily_acf.size());
    for (const std::vector<double>& day : out.daily_acf) {
      column.push_back(day[static_cast<std::size_t>(lag)]);
    }
    out.median_acf[static_cast<std::size_t>(lag)] = median_of(std::move(column));
  }
  return out;
}

std::string AcfDiagnostic::to_csv() const {
  std::string out = "lag,median_acf\n";
  char line[64];
  for (std::size_t lag = 0; lag < median_acf.size(); ++lag) {
    std::snprintf(line, sizeof line, "%zu,%.6g\n", lag, median_acf[lag]);
    out += line;
  }
  return out;
}

std::string report_json(const GlobalTestReport& report) {
  ordered_json j{
      {"t_raw", report.T_raw},
      {"t_std", report.T_std},
      {"critical_value", report.critical_value},
      {"source",
       report.source == CriticalSource::asymptotic ? "asymptotic" : "bootstrap"},
      {"reject", report.reject},
      {"argmax_block", report.argmax_block},
      {"theta_hat", report.theta_hat},
      {"jump_size", report.jump_size},
      {"block_count", report.block_count},
      {"block_length", report.block_length},
      {"alpha", report.alpha},
  };
  j["std_diffs"] = report.std_diffs;
  j["diff_valid"] = report.diff_valid;
  return j.dump(2);
}

std::string report_json(const LocalTestReport& report) {
  const ordered_json j{
      {"statistic", report.statistic},
      {"quantile", report.quantile},
      {"reject", report.reject},
      {"extremum_before", report.extremum_before},
      {"extremum_after", report.extremum_after},
      {"var_before", report.var_before},
      {"var_after", report.var_after},
      {"window_shrunk", report.window_shrunk},
      {"tau", report.tau},
      {"nh", report.nh},
      {"alpha", report.alpha},
  };
  return j.dump(2);
}

std::string race_json(const RaceRecord& record) {
  ordered_json j;
  j["ask"] = record.ask ? event_json(*record.ask) : ordered_json(nullptr);
  j["bid"] = record.bid ? event_json(*record.bid) : ordered_json(nullptr);
  j["mmn"] = record.mmn ? event_json(*record.mmn) : ordered_json(nullptr);
  j["both_detected"] = record.both_detected;
  j["advantage_seconds"] = record.advantage_seconds;
  return j.dump(2);
}

std::string events_jsonl(const std::vector<JumpEvent>& events) {
  std::string out;
  for (const JumpEvent& e : events) {
    out += event_json(e).dump();
    out += '\n';
  }
  return out;
}

void save_series(const QuoteSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[128];
  std::snprintf(buf, sizeof buf, "# side=%s start=%.17g end=%.17g\n",
                side_name(series.side), series.session.wall_clock_start,
                series.session.wall_clock_end);
  out << buf << "time,value\n";
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", series.times[i],
                  series.values[i]);
    out << buf;
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

QuoteSeries load_series(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  ++line_no;
  QuoteSeries series;
  {
    std::istringstream head(line);
    std::string hash;
    std::string side_field;
    std::string start_field;
    std::string end_field;
    head >> hash >> side_field >> start_field >> end_field;
    if (hash != "#" || side_field.rfind("side=", 0) != 0 ||
        start_field.rfind("start=", 0) != 0 || end_field.rfind("end=", 0) != 0) {
      parse_fail(path, line_no, "bad series header");
    }
    series.side = side_from(side_field.substr(5));
    series.session.wall_clock_start =
        parse_number(start_field.substr(6), path, line_no);
    series.session.wall_clock_end =
        parse_number(end_field.substr(4), path, line_no);
  }
  if (!std::getline(in, line) || trim(line) != "time,value") {
    parse_fail(path, line_no + 1, "expected header time,value");
  }
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != 2) parse_fail(path, line_no, "expected 2 fields");
    series.times.push_back(parse_number(f[0], path, line_no));
    series.values.push_back(parse_number(f[1], path, line_no));
  }
  return series;
}

}  // namespace lobjump
