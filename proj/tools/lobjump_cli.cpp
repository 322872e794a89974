#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lobjump/evt.hpp"
#include "lobjump/experiment.hpp"
#include "lobjump/jump_test.hpp"
#include "lobjump/online.hpp"
#include "lobjump/quotes_io.hpp"

namespace {

using lobjump::QuoteSeries;

void write_or_print(const std::string& content, const std::string& path) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

lobjump::NoiseSpec::Kind parse_noise_kind(const std::string& name) {
  if (name == "ar1") return lobjump::NoiseSpec::Kind::ar1_gaussian;
  if (name == "gaussian") return lobjump::NoiseSpec::Kind::iid_gaussian;
  if (name == "halfnormal") return lobjump::NoiseSpec::Kind::iid_halfnormal;
  if (name == "exponential") return lobjump::NoiseSpec::Kind::iid_exponential;
  if (name == "rounding") return lobjump::NoiseSpec::Kind::rounding;
  throw CLI::ValidationError("--noise", "unknown noise kind: " + name);
}

// Shared input options: either a single-series file written by `clean`
// or `simulate`, or a quote file with `--side` selecting the series.
struct SeriesInput {
  std::string path;
  std::string format = "series";  // series | quotes | lobster
  std::string side = "ask";
  bool clean = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--in", path, "input file")->required();
    cmd->add_option("--format", format, "series | quotes | lobster")
        ->check(CLI::IsMember({"series", "quotes", "lobster"}));
    cmd->add_option("--side", side, "series to pick from a quote file")
        ->check(CLI::IsMember({"ask", "bid", "mid"}));
    cmd->add_flag("--clean", clean,
                  "apply the default session cleaning rules after loading");
  }

  QuoteSeries load() const {
    QuoteSeries series;
    if (format == "series") {
      series = lobjump::load_series(path);
    } else {
      const lobjump::QuoteFormat f = format == "quotes"
                                         ? lobjump::QuoteFormat::csv
                                         : lobjump::QuoteFormat::lobster;
      lobjump::QuoteFile file = lobjump::load_quotes(path, f);
      for (long line : file.crossed_lines) {
        std::cerr << "warning: crossed quote at " << path << ":" << line
                  << " (kept)\n";
      }
      if (side == "ask") {
        series = std::move(file.ask);
      } else if (side == "bid") {
        series = std::move(file.bid);
      } else {
        series = std::move(file.mid);
      }
    }
    if (clean) series = lobjump::clean_session(series);
    series.validate();
    return series;
  }
};

lobjump::BootstrapHandle load_criticals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  in >> j;
  lobjump::BootstrapHandle handle;
  handle.stats = j.at("stats").get<std::vector<double>>();
  handle.spec.m = static_cast<int>(handle.stats.size());
  if (j.contains("nh")) handle.spec.nh = j["nh"].get<int>();
  if (j.contains("q_hat")) handle.spec.q_hat = j["q_hat"].get<double>();
  return handle;
}

int add_simulate(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "simulate",
      "simulate a quote session; with --reps, run a size/power experiment");
  struct Opts {
    long n = 23400;
    std::string noise = "ar1";
    double q = 1e-3;
    double phi = -0.5;
    double tick = 0.01;
    double x0 = 0.0;
    double jump_size = 0.0;
    double jump_time = 0.5;
    std::uint64_t seed = 1;
    std::string out_prefix = "session";
    std::string format = "series";
    // experiment mode
    int reps = 0;
    std::string test = "bhr";
    std::string data = "ask";
    std::string placement = "at";
    std::vector<double> jumps;
    int nhn = 0;
    int kn = 200;
    double alpha = 0.05;
    int bootstrap_m = 5000;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--n", opts->n, "observations per session");
  cmd->add_option("--noise", opts->noise,
                  "ar1 | gaussian | halfnormal | exponential | rounding");
  cmd->add_option("--q", opts->q, "noise level");
  cmd->add_option("--phi", opts->phi, "AR(1) coefficient");
  cmd->add_option("--tick", opts->tick, "tick size for rounding noise");
  cmd->add_option("--x0", opts->x0, "initial log price");
  cmd->add_option("--jump-size", opts->jump_size, "signed jump size");
  cmd->add_option("--jump-time", opts->jump_time, "jump time in (0,1)");
  cmd->add_option("--seed", opts->seed, "RNG seed");
  cmd->add_option("--out-prefix", opts->out_prefix,
                  "prefix for <prefix>_{ask,bid,mid}.csv");
  cmd->add_option("--session-format", opts->format,
                  "series | interchange output format")
      ->check(CLI::IsMember({"series", "interchange"}));
  cmd->add_option("--reps", opts->reps,
                  "experiment mode: replications per cell");
  cmd->add_option("--test", opts->test,
                  "bhr | bhr-boot | lm-boot | bhr-local | lm-local")
      ->check(CLI::IsMember(
          {"bhr", "bhr-boot", "lm-boot", "bhr-local", "lm-local"}));
  cmd->add_option("--data", opts->data, "ask | bid | mid")
      ->check(CLI::IsMember({"ask", "bid", "mid"}));
  cmd->add_option("--placement", opts->placement,
                  "local test time vs the jump: at | before | after")
      ->check(CLI::IsMember({"at", "before", "after"}));
  cmd->add_option("--jumps", opts->jumps, "experiment jump sizes");
  cmd->add_option("--nhn", opts->nhn, "observations per block (0 = rule)");
  cmd->add_option("--kn", opts->kn, "volatility window, in blocks");
  cmd->add_option("--alpha", opts->alpha, "test level");
  cmd->add_option("--bootstrap-m", opts->bootstrap_m, "bootstrap replicas");
  cmd->add_option("--out", opts->out, "output path (default stdout)");

  cmd->callback([opts]() {
    lobjump::NoiseSpec noise;
    noise.kind = parse_noise_kind(opts->noise);
    noise.q = opts->q;
    noise.phi = opts->phi;
    noise.tick = opts->tick;

    if (opts->reps > 0) {
      lobjump::ExperimentSpec spec;
      spec.sim.n = opts->n;
      spec.noise = noise;
      spec.x0 = opts->x0;
      spec.data = opts->data == "ask" ? lobjump::DataSeries::ask
                  : opts->data == "bid" ? lobjump::DataSeries::bid
                                        : lobjump::DataSeries::mid;
      spec.test = opts->test == "bhr" ? lobjump::TestKind::bhr_asymptotic
                  : opts->test == "bhr-boot" ? lobjump::TestKind::bhr_bootstrap
                  : opts->test == "lm-boot"  ? lobjump::TestKind::lm_bootstrap
                  : opts->test == "bhr-local" ? lobjump::TestKind::bhr_local
                                              : lobjump::TestKind::lm_local;
      spec.placement = opts->placement == "at"
                           ? lobjump::TauPlacement::at_jump
                       : opts->placement == "before"
                           ? lobjump::TauPlacement::before_negative
                           : lobjump::TauPlacement::after_positive;
      spec.jump_sizes = opts->jumps.empty() ? std::vector<double>{0.0}
                                            : opts->jumps;
      spec.nh = opts->nhn;
      spec.spot.K_n = opts->kn;
      spec.spot.correction = lobjump::CorrectionSpec::constant(0.954 * 0.954);
      spec.alpha = opts->alpha;
      spec.bootstrap_m = opts->bootstrap_m;
      spec.replications = opts->reps;
      spec.seed = opts->seed;
      write_or_print(lobjump::run_experiment(spec).to_csv(), opts->out);
      return;
    }

    lobjump::SessionSpec session;
    session.sim.n = opts->n;
    session.noise = noise;
    session.x0 = opts->x0;
    if (opts->jump_size != 0.0) {
      session.jump = lobjump::Jump{opts->jump_time, opts->jump_size};
    }
    lobjump::ObservationSet obs =
        lobjump::simulate_session(session, opts->seed);
    // wall clock 09:30 - 16:00
    const lobjump::SessionInfo wall{34200.0, 57600.0};
    obs.ask.session = obs.bid.session = obs.mid.session = wall;

    if (opts->format == "series") {
      lobjump::save_series(obs.ask, opts->out_prefix + "_ask.csv");
      lobjump::save_series(obs.bid, opts->out_prefix + "_bid.csv");
      lobjump::save_series(obs.mid, opts->out_prefix + "_mid.csv");
      std::cerr << "wrote " << opts->out_prefix << "_{ask,bid,mid}.csv ("
                << obs.ask.size() << "/" << obs.bid.size() << "/"
                << obs.mid.size() << " observations)\n";
      return;
    }

    // Level-1 snapshot export: one row per mid-grid event, each side
    // carried forward from its last update, leading rows without both
    // sides dropped.
    std::string csv = "time_sec,ask_price,bid_price\n";
    char line[128];
    std::size_t ai = 0;
    std::size_t bi = 0;
    std::optional<double> ask;
    std::optional<double> bid;
    for (std::size_t i = 0; i < obs.mid.times.size(); ++i) {
      const double t = obs.mid.times[i];
      while (ai < obs.ask.times.size() && obs.ask.times[ai] <= t) {
        ask = obs.ask.values[ai++];
      }
      while (bi < obs.bid.times.size() && obs.bid.times[bi] <= t) {
        bid = obs.bid.values[bi++];
      }
      if (!ask || !bid) continue;
      std::snprintf(line, sizeof line, "%.6f,%.6f,%.6f\n",
                    wall.wall_clock_start + t * wall.wall_seconds(),
                    std::exp(*ask), std::exp(*bid));
      csv += line;
    }
    write_or_print(csv, opts->out);
  });
  return 0;
}

int add_test_global(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand("test-global",
                                     "jump test over the whole session");
  auto input = std::make_shared<SeriesInput>();
  input->attach(cmd);
  struct Opts {
    int nhn = 0;
    int blocks = 0;
    int kn = 200;
    double alpha = 0.05;
    double correction = 0.954 * 0.954;
    std::string source = "asymptotic";
    std::string criticals;
    std::string out;
    bool sequential = false;
    double alpha_decay = 1.0;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--nhn", opts->nhn, "observations per block");
  cmd->add_option("--blocks", opts->blocks,
                  "block count (overrides --nhn; 0 = n^{2/3}/1.3 rule)");
  cmd->add_option("--kn", opts->kn, "volatility window, in blocks");
  cmd->add_option("--alpha", opts->alpha, "test level");
  cmd->add_option("--correction", opts->correction,
                  "multiplicative variance correction");
  cmd->add_option("--critical-source", opts->source, "asymptotic | bootstrap")
      ->check(CLI::IsMember({"asymptotic", "bootstrap"}));
  cmd->add_option("--criticals", opts->criticals,
                  "calibrate-bootstrap output (bootstrap source)");
  cmd->add_flag("--sequential", opts->sequential,
                "detect repeatedly and emit one event per jump");
  cmd->add_option("--alpha-decay", opts->alpha_decay,
                  "level multiplier per sequential detection");
  cmd->add_option("--out", opts->out, "output path (default stdout)");

  cmd->callback([input, opts]() {
    const QuoteSeries series = input->load();
    lobjump::SpotVolConfig spot;
    spot.K_n = opts->kn;
    spot.correction = lobjump::CorrectionSpec::constant(opts->correction);

    const lobjump::GridTarget target =
        opts->blocks > 0 ? lobjump::GridTarget::blocks(opts->blocks)
        : opts->nhn > 0
            ? lobjump::GridTarget::per_block(opts->nhn)
            : lobjump::GridTarget::blocks(static_cast<int>(std::floor(
                  std::pow(static_cast<double>(series.n()), 2.0 / 3.0) /
                  1.3)));

    if (opts->sequential) {
      lobjump::SequentialConfig cfg;
      cfg.grid = target;
      cfg.spot = spot;
      cfg.alpha = opts->alpha;
      cfg.alpha_decay = opts->alpha_decay;
      const std::vector<lobjump::JumpEvent> events =
          lobjump::sequential_detect(series, cfg);
      write_or_print(lobjump::events_jsonl(events), opts->out);
      return;
    }

    lobjump::GlobalTestReport report;
    if (opts->source == "bootstrap") {
      if (opts->criticals.empty()) {
        throw CLI::ValidationError(
            "--criticals", "bootstrap source needs a criticals file");
      }
      const lobjump::BootstrapHandle handle = load_criticals(opts->criticals);
      report = lobjump::global_test(series, target, spot, opts->alpha,
                                    lobjump::CriticalSource::bootstrap,
                                    &handle);
    } else {
      report = lobjump::global_test(series, target, spot, opts->alpha);
    }
    write_or_print(lobjump::report_json(report) + "\n", opts->out);
  });
  return 0;
}

int add_test_local(CLI::App& app) {
  CLI::App* cmd =
      app.add_subcommand("test-local", "jump test at a single session time");
  auto input = std::make_shared<SeriesInput>();
  input->attach(cmd);
  struct Opts {
    double tau = 0.5;
    int nhn = 30;
    int kn = 200;
    double alpha = 0.05;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--tau", opts->tau, "test time in [0,1]")->required();
  cmd->add_option("--nhn", opts->nhn, "window length in observations");
  cmd->add_option("--kn", opts->kn, "volatility window, in blocks");
  cmd->add_option("--alpha", opts->alpha, "test level");
  cmd->add_option("--out", opts->out, "output path (default stdout)");

  cmd->callback([input, opts]() {
    const QuoteSeries series = input->load();
    lobjump::SpotVolConfig spot;
    spot.K_n = opts->kn;
    const lobjump::LocalTestReport report =
        lobjump::local_test(series, opts->tau, opts->nhn, spot, opts->alpha);
    write_or_print(lobjump::report_json(report) + "\n", opts->out);
  });
  return 0;
}

int add_detect_online(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "detect-online", "stream a one-sided series through the online rule");
  auto input = std::make_shared<SeriesInput>();
  input->attach(cmd);
  struct Opts {
    int blocks = 0;
    double alpha = 0.05;
    int kn = 200;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--blocks", opts->blocks,
                  "block count (0 = asymptotic rule for n)");
  cmd->add_option("--alpha", opts->alpha, "per-block false alarm level");
  cmd->add_option("--kn", opts->kn, "volatility window, in blocks");
  cmd->add_option("--out", opts->out, "output path (default stdout)");

  cmd->callback([input, opts]() {
    const QuoteSeries series = input->load();
    lobjump::OnlineConfig cfg;
    cfg.n = series.n();
    cfg.block_count = opts->blocks > 0
                          ? opts->blocks
                          : lobjump::evt::asymptotic_block_count(series.n());
    cfg.alpha = opts->alpha;
    cfg.side = series.side;
    cfg.spot.K_n = opts->kn;
    cfg.session = series.session;
    lobjump::DetectorState state = lobjump::detector_new(cfg);
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      lobjump::push(state, series.times[i], series.values[i]);
    }
    lobjump::finalize_session(state);
    write_or_print(lobjump::events_jsonl(state.events), opts->out);
    std::cerr << state.events.size() << " event(s)\n";
  });
  return 0;
}

int add_race(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "race", "first-detection race: one-sided extrema vs mid averages");
  struct Opts {
    std::string ask;
    std::string bid;
    std::string mid;
    int blocks = 0;
    int nhn = 30;
    double alpha = 0.05;
    int kn = 200;
    double vol = 0.01;
    double mmn_threshold = 0.0;
    std::string criticals;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--ask", opts->ask, "ask series file")->required();
  cmd->add_option("--bid", opts->bid, "bid series file")->required();
  cmd->add_option("--mid", opts->mid, "mid series file")->required();
  cmd->add_option("--blocks", opts->blocks,
                  "one-sided block count (0 = asymptotic rule)");
  cmd->add_option("--nhn", opts->nhn, "mid-average block length");
  cmd->add_option("--alpha", opts->alpha, "one-sided per-block level");
  cmd->add_option("--kn", opts->kn, "volatility window, in blocks");
  cmd->add_option("--vol", opts->vol,
                  "instantaneous volatility for the mid denominators");
  cmd->add_option("--mmn-threshold", opts->mmn_threshold,
                  "mid-average detection threshold");
  cmd->add_option("--criticals", opts->criticals,
                  "use a calibrate-bootstrap quantile as the threshold");
  cmd->add_option("--out", opts->out, "output path (default stdout)");

  cmd->callback([opts]() {
    const QuoteSeries ask = lobjump::load_series(opts->ask);
    const QuoteSeries bid = lobjump::load_series(opts->bid);
    const QuoteSeries mid = lobjump::load_series(opts->mid);
    lobjump::RaceConfig cfg;
    cfg.one_sided.n = mid.n();
    cfg.one_sided.block_count =
        opts->blocks > 0 ? opts->blocks
                         : lobjump::evt::asymptotic_block_count(mid.n());
    cfg.one_sided.alpha = opts->alpha;
    cfg.one_sided.spot.K_n = opts->kn;
    cfg.one_sided.session = mid.session;
    cfg.mmn.nh = opts->nhn;
    cfg.mmn.q_hat = lobjump::estimate_noise_level(mid);
    cfg.mmn.inst_vol.assign(static_cast<std::size_t>(mid.n()) + 1, opts->vol);
    cfg.mmn.session = mid.session;
    double threshold = opts->mmn_threshold;
    if (!opts->criticals.empty()) {
      threshold = load_criticals(opts->criticals).quantile(1.0 - opts->alpha);
    }
    if (threshold <= 0.0) {
      throw CLI::ValidationError(
          "--mmn-threshold",
          "need a positive threshold or a criticals file");
    }
    cfg.mmn.threshold = threshold;
    const lobjump::RaceRecord record = lobjump::race(mid, ask, bid, cfg);
    write_or_print(lobjump::race_json(record) + "\n", opts->out);
  });
  return 0;
}

int add_calibrate(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "calibrate-bootstrap", "resample null statistics and store quantiles");
  struct Opts {
    std::string stat = "bhr-global";
    std::string scheme = "additive-mid";
    int m = 5000;
    long n = 23400;
    int nhn = 30;
    double q = 1e-3;
    double vol = 0.01;
    std::uint64_t vol_seed = 0;
    std::uint64_t seed = 1;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--stat", opts->stat,
                  "bhr-global | lm-global | bhr-local | lm-local")
      ->check(CLI::IsMember(
          {"bhr-global", "lm-global", "bhr-local", "lm-local"}));
  cmd->add_option("--scheme", opts->scheme,
                  "additive-mid | halfnormal-ask | thinned-ask | thinned-bid")
      ->check(CLI::IsMember({"additive-mid", "halfnormal-ask", "thinned-ask",
                             "thinned-bid"}));
  cmd->add_option("--m", opts->m, "bootstrap replicas");
  cmd->add_option("--n", opts->n, "observations per replica session");
  cmd->add_option("--nhn", opts->nhn, "observations per block");
  cmd->add_option("--q", opts->q, "noise level for the replicas");
  cmd->add_option("--vol", opts->vol, "flat instantaneous volatility");
  cmd->add_option("--vol-seed", opts->vol_seed,
                  "draw the volatility path from a simulated session instead");
  cmd->add_option("--seed", opts->seed, "RNG seed");
  cmd->add_option("--out", opts->out, "output path (default stdout)");

  cmd->callback([opts]() {
    lobjump::BootstrapSpec spec;
    spec.m = opts->m;
    spec.n = opts->n;
    spec.q_hat = opts->q;
    spec.nh = opts->nhn;
    spec.seed = opts->seed;
    spec.stat = opts->stat == "bhr-global" ? lobjump::BootStat::bhr_global
                : opts->stat == "lm-global" ? lobjump::BootStat::lm_global
                : opts->stat == "bhr-local" ? lobjump::BootStat::bhr_local
                                            : lobjump::BootStat::lm_local;
    spec.scheme = opts->scheme == "additive-mid"
                      ? lobjump::BootScheme::additive_mid
                  : opts->scheme == "halfnormal-ask"
                      ? lobjump::BootScheme::halfnormal_ask
                  : opts->scheme == "thinned-ask"
                      ? lobjump::BootScheme::thinned_ask
                      : lobjump::BootScheme::thinned_bid;
    if (opts->vol_seed != 0) {
      lobjump::SimConfig sim;
      sim.n = opts->n;
      lobjump::Rng rng(opts->vol_seed);
      const lobjump::PathSet path = lobjump::simulate_path(sim, rng);
      spec.vol.resize(path.sigma.size());
      for (std::size_t i = 0; i < path.sigma.size(); ++i) {
        spec.vol[i] = lobjump::seasonal_factor(
                          static_cast<double>(i) /
                          static_cast<double>(path.sigma.size() - 1)) *
                      path.sigma[i];
      }
    } else {
      spec.vol.assign(static_cast<std::size_t>(opts->n) + 1, opts->vol);
    }
    const lobjump::BootstrapHandle handle =
        lobjump::bootstrap_critical_values(spec);
    nlohmann::ordered_json j;
    j["stat"] = opts->stat;
    j["scheme"] = opts->scheme;
    j["m"] = spec.m;
    j["n"] = spec.n;
    j["nh"] = spec.nh;
    j["q_hat"] = spec.q_hat;
    j["quantiles"] = {{"0.90", handle.quantile(0.90)},
                      {"0.95", handle.quantile(0.95)},
                      {"0.99", handle.quantile(0.99)}};
    j["stats"] = handle.stats;
    write_or_print(j.dump(2) + "\n", opts->out);
  });
  return 0;
}

int add_reproduce(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "reproduce-table", "re-run a reference simulation table and check it");
  struct Opts {
    std::string table = "T1";
    int reps = 1000;
    std::uint64_t seed = 20240901;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--table", opts->table, "T1 | T2 | T3 | T4 | S1")->required();
  cmd->add_option("--reps", opts->reps, "replications per cell (>= 200)");
  cmd->add_option("--seed", opts->seed, "RNG seed");
  cmd->add_option("--out", opts->out, "CSV output path (default stdout)");

  cmd->callback([opts]() {
    const lobjump::TableReport report = lobjump::reproduce_table(
        lobjump::parse_table_id(opts->table), opts->reps, opts->seed);
    write_or_print(report.to_csv(), opts->out);
    int passed = 0;
    for (const lobjump::TableCell& cell : report.cells) {
      passed += cell.pass ? 1 : 0;
    }
    std::cerr << lobjump::table_name(report.table) << ": " << passed << "/"
              << report.cells.size() << " cells within tolerance\n";
  });
  return 0;
}

int add_diagnose_acf(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "diagnose-acf", "cross-day median autocorrelation of quote returns");
  struct Opts {
    std::vector<std::string> inputs;
    std::string format = "quotes";
    std::string side = "ask";
    bool clean = true;
    int max_lag = 10;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--in", opts->inputs, "one quote file per day")->required();
  cmd->add_option("--format", opts->format, "series | quotes | lobster")
      ->check(CLI::IsMember({"series", "quotes", "lobster"}));
  cmd->add_option("--side", opts->side, "ask | bid | mid")
      ->check(CLI::IsMember({"ask", "bid", "mid"}));
  cmd->add_flag("--no-clean{false}", opts->clean,
                "skip the default session cleaning");
  cmd->add_option("--max-lag", opts->max_lag, "largest lag");
  cmd->add_option("--out", opts->out, "CSV output path (default stdout)");

  cmd->callback([opts]() {
    std::vector<QuoteSeries> days(opts->inputs.size());
    for (std::size_t i = 0; i < opts->inputs.size(); ++i) {
      SeriesInput input;
      input.path = opts->inputs[i];
      input.format = opts->format;
      input.side = opts->side;
      input.clean = opts->clean && opts->format != "series";
      days[i] = input.load();
    }
    const lobjump::AcfDiagnostic table =
        lobjump::acf_median_diagnostic(days, opts->max_lag);
    write_or_print(table.to_csv(), opts->out);
  });
  return 0;
}

int add_clean(CLI::App& app) {
  CLI::App* cmd = app.add_subcommand(
      "clean", "session-window and change filtering of a quote series");
  struct Opts {
    std::string in;
    std::string format = "quotes";
    std::string side = "ask";
    double window_start = 34200.0;
    double window_end = 57600.0;
    double exclude_start = 34200.0;
    double exclude_end = 34500.0;
    bool keep_unchanged = false;
    bool split = false;
    std::string out;
  };
  auto opts = std::make_shared<Opts>();
  cmd->add_option("--in", opts->in, "input file")->required();
  cmd->add_option("--format", opts->format, "quotes | lobster | series")
      ->check(CLI::IsMember({"quotes", "lobster", "series"}));
  cmd->add_option("--side", opts->side, "ask | bid | mid")
      ->check(CLI::IsMember({"ask", "bid", "mid"}));
  cmd->add_option("--window-start", opts->window_start,
                  "session start, seconds after midnight");
  cmd->add_option("--window-end", opts->window_end,
                  "session end, seconds after midnight");
  cmd->add_option("--exclude-start", opts->exclude_start,
                  "opening exclusion start");
  cmd->add_option("--exclude-end", opts->exclude_end,
                  "opening exclusion end");
  cmd->add_flag("--keep-unchanged", opts->keep_unchanged,
                "keep rows where the quote does not change");
  cmd->add_flag("--split", opts->split,
                "also write the seven intraday segments");
  cmd->add_option("--out", opts->out, "output series path")->required();

  cmd->callback([opts]() {
    SeriesInput input;
    input.path = opts->in;
    input.format = opts->format;
    input.side = opts->side;
    QuoteSeries series = input.load();
    lobjump::SessionCleanRules rules;
    rules.window_start = opts->window_start;
    rules.window_end = opts->window_end;
    rules.exclude_start = opts->exclude_start;
    rules.exclude_end = opts->exclude_end;
    rules.change_filter = !opts->keep_unchanged;
    series = lobjump::clean_session(series, rules);
    lobjump::save_series(series, opts->out);
    std::cerr << "kept " << series.size() << " observations\n";
    if (opts->split) {
      const lobjump::IntervalSplit segments = lobjump::split_intervals(series);
      for (std::size_t seg = 0; seg < segments.segments.size(); ++seg) {
        const std::string path =
            opts->out + ".seg" + std::to_string(seg + 1) + ".csv";
        lobjump::save_series(segments.segments[seg], path);
        if (segments.empty[seg]) {
          std::cerr << "segment " << seg + 1 << " is empty\n";
        }
      }
    }
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-sided quote noise jump detection toolkit"};
  app.require_subcommand(1);
  app.add_option("--threads",
                 [](const std::vector<std::string>& values) {
                   setenv("LOBJUMP_THREADS", values.back().c_str(), 1);
                   return true;
                 },
                 "worker threads (default: LOBJUMP_THREADS or all cores)");

  add_simulate(app);
  add_test_global(app);
  add_test_local(app);
  add_detect_online(app);
  add_race(app);
  add_calibrate(app);
  add_reproduce(app);
  add_diagnose_acf(app);
  add_clean(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
