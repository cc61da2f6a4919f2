#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "peerperf/pairwise.hpp"
#include "peerperf/panels.hpp"
#include "peerperf/ratios.hpp"
#include "peerperf/trend.hpp"

namespace peerperf {

struct RunConfig {
    Month start{2014, 1};
    Month end{2020, 12};
    std::vector<int> horizons = {3};
    std::vector<FactorModel> models = {FactorModel::carhart4};
    double q_lo = 0.25;
    double q_hi = 0.75;
    double gamma = 0.10;
    std::vector<double> lambda_grid = default_lambda_grid();
    int min_obs = 60;
    std::uint64_t seed = 42;
    int threads = 0;  // 0 = runtime default

    std::string returns_path;
    std::string factors_carhart4_path;
    std::string factors_ff5_path;
    std::string emissions_path;
    std::string out_dir = ".";
};

void validate(const RunConfig& config);
RunConfig load_run_config(const std::string& path);  // JSON document

struct EvalWindow {
    std::size_t first = 0;  // calendar index of first window day
    std::size_t last = 0;   // calendar index of last window day (inclusive)
    int n_days = 0;
};

// Forward-looking window: first trading day after month m through the last
// trading day of month m + h.
EvalWindow evaluation_window(Month m, int horizon, const TradingCalendar& cal);

enum class Execution { serial, parallel };

// Pairwise tests for every unordered pair of the given firm columns over a
// window; slot order is fixed by the pair index, so parallel and serial
// execution produce identical vectors.
std::vector<PairTest> group_pair_tests(const ReturnPanel& panel,
                                       const Eigen::MatrixXd& factors_aligned,
                                       const std::vector<std::size_t>& members,
                                       const EvalWindow& window, int min_obs,
                                       Execution exec);

// Per-stock ratio triples from the pair-test matrix. rng_keys holds one
// bootstrap stream key per member.
std::vector<RatioTriple> group_ratio_triples(const std::vector<PairTest>& tests,
                                             std::size_t n_members,
                                             const std::vector<std::uint64_t>& rng_keys,
                                             double gamma,
                                             const std::vector<double>& lambda_grid,
                                             Execution exec);

struct GroupMonthRow {
    FactorModel model = FactorModel::carhart4;
    int horizon = 3;
    Month month;
    std::string group;
    AggregateRatios agg;
};

struct RunManifest {
    RunConfig config;
    std::vector<GroupMonthRow> group_sizes_source;  // effective N per row
    std::map<int, Month> series_end;                // per horizon
    std::string version = "0.1.0";
    double wall_clock_seconds = 0.0;
};

struct BacktestResult {
    std::vector<GroupMonthRow> rows;
    std::vector<RatioSeries> series;
    RunManifest manifest;
};

BacktestResult run_backtest(const RunConfig& config, const ReturnPanel& returns,
                            const std::map<FactorModel, FactorPanel>& factors,
                            const EmissionsTable& emissions,
                            Execution exec = Execution::parallel);

void write_ratios_csv(const std::vector<GroupMonthRow>& rows, const std::string& path);
std::vector<RatioSeries> read_ratio_series(const std::string& ratios_csv_path);
void write_summary_csv(const std::vector<SeriesSummary>& summaries,
                       const std::string& path);
void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace peerperf
