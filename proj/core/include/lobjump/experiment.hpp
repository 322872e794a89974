#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lobjump/lm_baseline.hpp"
#include "lobjump/simulate.hpp"
#include "lobjump/spot_vol.hpp"

namespace lobjump {

// Which decision rule a replication runs.
//   bhr_asymptotic: full global test with estimated volatility and the
//                   Gumbel critical value.
//   bhr_bootstrap:  raw extrema maximum with the true volatility path,
//                   compared against a resampled null quantile.
//   lm_bootstrap:   block-average maximum, resampled null quantile.
//   bhr_local:      windowed-extrema comparison at a single time.
//   lm_local:       windowed-average comparison at a single time.
enum class TestKind {
  bhr_asymptotic,
  bhr_bootstrap,
  lm_bootstrap,
  bhr_local,
  lm_local,
};

enum class DataSeries { ask, bid, mid };

// Placement of the evaluation time for local tests relative to the
// injected jump. The straddling placements force the jump sign so the
// shared window extremum still carries the jump: negative jumps when
// testing before, positive when testing after.
enum class TauPlacement { at_jump, before_negative, after_positive };

struct ExperimentSpec {
  SimConfig sim;
  NoiseSpec noise;
  double x0 = 0.0;
  DataSeries data = DataSeries::ask;
  TestKind test = TestKind::bhr_asymptotic;
  std::string label;  // "test" column of the CSV; defaults per kind

  // One cell per entry; 0.0 rows estimate the size. Jump times are
  // uniform on [jump_lo, jump_hi] with random sign unless the
  // placement dictates it.
  std::vector<double> jump_sizes;
  double jump_lo = 0.1;
  double jump_hi = 0.9;

  // Observations per block. 0 selects the block count from the
  // observed series length as floor(n^{2/3} / 1.3); bootstrap and
  // local kinds require an explicit value.
  int nh = 0;

  TauPlacement placement = TauPlacement::at_jump;
  SpotVolConfig spot;  // bhr_asymptotic only
  double alpha = 0.05;

  // Null distribution for the bootstrap kinds. When handle is null, a
  // representative no-jump session (same sim and noise config) supplies
  // the noise level and volatility path and bootstrap_m replicas are
  // resampled from it. A caller-provided handle is used as-is; it must
  // match the statistic and block size.
  int bootstrap_m = 5000;
  const BootstrapHandle* handle = nullptr;

  int replications = 1000;
  std::uint64_t seed = 1;
};

struct CellResult {
  double q = 0.0;
  double jump_size = 0.0;
  std::string test;
  int nh_n = 0;
  double rejection_rate = 0.0;  // over the successful replications
  int replications = 0;
  int failures = 0;
};

struct SizePowerTable {
  std::vector<CellResult> cells;
  std::string to_csv() const;
};

// Rejection frequency per jump size with deterministic per-replication
// seeding. Replication errors are counted, not propagated.
SizePowerTable run_experiment(const ExperimentSpec& spec);

// Volatility settings the table rows were tuned with: a symmetric
// window of about two hundred differences and the finite-sample
// correction the asymptotic test needs at that window size.
SpotVolConfig reference_spot_config();

// The null distribution run_experiment would build for a bootstrap
// kind: one representative session for the noise level and volatility,
// then bootstrap_m resampled statistics.
BootstrapHandle experiment_null_distribution(const ExperimentSpec& spec);

// Reference tables from the simulation study this library reproduces.
enum class TableId { t1, t2, t3, t4, s1 };

TableId parse_table_id(const std::string& name);  // "T1" ... "S1"
std::string table_name(TableId id);

// max(0.03, 3 * sqrt(target (1 - target) / replications)).
double rate_tolerance(double target, int replications);

struct TableCell {
  CellResult result;
  double target = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct TableReport {
  TableId table = TableId::t1;
  std::vector<TableCell> cells;
  bool all_pass = false;
  std::string to_csv() const;
};

// Re-runs the simulation rows behind the reference table and checks
// every cell against its target. budget is the replication count per
// cell, at least 200.
TableReport reproduce_table(TableId table, int budget, std::uint64_t seed);

}  // namespace lobjump
