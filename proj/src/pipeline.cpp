#include "peerperf/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "peerperf/csv.hpp"
#include "peerperf/errors.hpp"
#include "peerperf/ingest.hpp"
#include "peerperf/rng.hpp"

namespace peerperf {

namespace {

using nlohmann::json;

std::string fmt10(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

// (i, j) with i < j from a flat pair index.
std::pair<std::size_t, std::size_t> unrank_pair(std::size_t idx, std::size_t n) {
    std::size_t i = 0;
    std::size_t row = n - 1;
    while (idx >= row) {
        idx -= row;
        ++i;
        --row;
    }
    return {i, i + 1 + idx};
}

// Factor rows aligned to the return calendar; every trading day must have a
// factor observation.
Eigen::MatrixXd align_factors(const ReturnPanel& returns, const FactorPanel& factors) {
    const auto t = static_cast<Eigen::Index>(returns.calendar.size());
    Eigen::MatrixXd out(t, factors.k());
    for (Eigen::Index d = 0; d < t; ++d) {
        const Date& day = returns.calendar[static_cast<std::size_t>(d)];
        std::size_t row = factors.calendar.find(day);
        if (row == factors.calendar.size()) {
            throw CoverageError("no factor data for trading day " + day.to_string());
        }
        out.row(d) = factors.factors.row(static_cast<Eigen::Index>(row));
    }
    return out;
}

std::uint64_t group_id(const std::string& group) {
    if (group == "green") return 1;
    if (group == "brown") return 2;
    return 3;
}

}  // namespace

void validate(const RunConfig& config) {
    if (!(config.start < config.end)) throw ValidationError("start month must precede end month");
    if (config.horizons.empty()) throw ValidationError("at least one horizon required");
    for (int h : config.horizons) {
        if (h != 3 && h != 6 && h != 12) {
            throw ValidationError("horizon must be one of 3,6,12");
        }
    }
    if (config.models.empty()) throw ValidationError("at least one factor model required");
    if (!(config.q_lo > 0 && config.q_lo < config.q_hi && config.q_hi < 1)) {
        throw ValidationError("percentiles must satisfy 0 < q_lo < q_hi < 1");
    }
    if (config.gamma <= 0 || config.gamma >= 1) {
        throw ValidationError("gamma must lie in (0,1)");
    }
    if (config.min_obs < 2) throw ValidationError("min_obs must be at least 2");
    if (config.lambda_grid.empty()) throw ValidationError("empty lambda grid");
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }

    RunConfig c;
    try {
        if (j.contains("start_month")) c.start = Month::parse(j["start_month"]);
        if (j.contains("end_month")) c.end = Month::parse(j["end_month"]);
        if (j.contains("horizons")) c.horizons = j["horizons"].get<std::vector<int>>();
        if (j.contains("models")) {
            c.models.clear();
            for (const auto& m : j["models"]) {
                c.models.push_back(factor_model_from_string(m.get<std::string>()));
            }
        }
        if (j.contains("q_lo")) c.q_lo = j["q_lo"];
        if (j.contains("q_hi")) c.q_hi = j["q_hi"];
        if (j.contains("gamma")) c.gamma = j["gamma"];
        if (j.contains("lambda_grid")) {
            c.lambda_grid = j["lambda_grid"].get<std::vector<double>>();
        }
        if (j.contains("min_obs")) c.min_obs = j["min_obs"];
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("threads")) c.threads = j["threads"];
        if (j.contains("returns")) c.returns_path = j["returns"];
        if (j.contains("factors_carhart4")) c.factors_carhart4_path = j["factors_carhart4"];
        if (j.contains("factors_ff5")) c.factors_ff5_path = j["factors_ff5"];
        if (j.contains("emissions")) c.emissions_path = j["emissions"];
        if (j.contains("out_dir")) c.out_dir = j["out_dir"];
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return c;
}

EvalWindow evaluation_window(Month m, int horizon, const TradingCalendar& cal) {
    if (horizon < 1) throw DomainError("horizon must be positive");
    if (cal.empty()) throw CoverageError("empty trading calendar");
    const Month last_covered = Month::of(cal.back());
    if (m + horizon > last_covered) {
        throw CoverageError("evaluation window for " + m.to_string() + " (h=" +
                            std::to_string(horizon) + ") extends beyond calendar end " +
                            cal.back().to_string());
    }
    EvalWindow w;
    w.first = cal.lower_bound((m + 1).first_day());
    std::size_t after = cal.lower_bound(Date::from_serial((m + horizon).last_day().serial() + 1));
    if (after == 0 || w.first >= after) {
        throw CoverageError("no trading days in evaluation window for " + m.to_string());
    }
    w.last = after - 1;
    w.n_days = static_cast<int>(w.last - w.first + 1);
    return w;
}

std::vector<PairTest> group_pair_tests(const ReturnPanel& panel,
                                       const Eigen::MatrixXd& factors_aligned,
                                       const std::vector<std::size_t>& members,
                                       const EvalWindow& window, int min_obs,
                                       Execution exec) {
    const std::size_t n = members.size();
    const auto rows = static_cast<Eigen::Index>(window.last - window.first + 1);
    const auto first = static_cast<Eigen::Index>(window.first);
    const std::size_t n_pairs = n * (n - 1) / 2;

    Eigen::MatrixXd f = factors_aligned.middleRows(first, rows);
    std::vector<PairTest> tests(n_pairs);

    const auto body = [&](std::size_t p) {
        auto [i, j] = unrank_pair(p, n);
        Eigen::VectorXd ri = panel.returns.col(static_cast<Eigen::Index>(members[i]))
                                 .segment(first, rows);
        Eigen::VectorXd rj = panel.returns.col(static_cast<Eigen::Index>(members[j]))
                                 .segment(first, rows);
        tests[p] = pairwise_alpha_test(ri, rj, f, panel.firm_ids[members[i]],
                                       panel.firm_ids[members[j]], min_obs);
    };

    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::int64_t p = 0; p < static_cast<std::int64_t>(n_pairs); ++p) {
            body(static_cast<std::size_t>(p));
        }
    } else {
        for (std::size_t p = 0; p < n_pairs; ++p) body(p);
    }
    return tests;
}

std::vector<RatioTriple> group_ratio_triples(const std::vector<PairTest>& tests,
                                             std::size_t n_members,
                                             const std::vector<std::uint64_t>& rng_keys,
                                             double gamma,
                                             const std::vector<double>& lambda_grid,
                                             Execution exec) {
    if (rng_keys.size() != n_members) throw AlignmentError("one rng key per member required");
    const std::size_t n = n_members;
    std::vector<RatioTriple> triples(n);

    const auto body = [&](std::size_t i) {
        PairEvidence ev;
        ev.p_values.reserve(n - 1);
        ev.signs.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            std::size_t a = std::min(i, j), b = std::max(i, j);
            const PairTest& t = tests[a * n - a * (a + 1) / 2 + (b - a - 1)];
            double da = i < j ? t.delta_alpha : -t.delta_alpha;
            ev.p_values.push_back(t.p_value);
            ev.signs.push_back(da > 0.0 ? 1 : (da < 0.0 ? -1 : 0));
        }
        triples[i] = stock_ratio_triple(ev, rng_keys[i], gamma, lambda_grid);
    };

    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            body(static_cast<std::size_t>(i));
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) body(i);
    }
    return triples;
}

BacktestResult run_backtest(const RunConfig& config, const ReturnPanel& returns,
                            const std::map<FactorModel, FactorPanel>& factors,
                            const EmissionsTable& emissions, Execution exec) {
    validate(config);
    const auto t0 = std::chrono::steady_clock::now();
    if (config.threads > 0) omp_set_num_threads(config.threads);

    const TradingCalendar& cal = returns.calendar;
    if (cal.empty()) throw CoverageError("empty return panel");
    const Month last_covered = Month::of(cal.back());

    BacktestResult result;
    result.manifest.config = config;

    for (FactorModel model : config.models) {
        auto it = factors.find(model);
        if (it == factors.end()) {
            throw CoverageError("no factor panel for model " + to_string(model));
        }
        Eigen::MatrixXd aligned = align_factors(returns, it->second);

        for (int h : config.horizons) {
            Month last_formation = std::min(config.end, last_covered - h);
            if (last_formation < config.start) {
                throw CoverageError("no evaluation window fits between " +
                                    config.start.to_string() + " and calendar end " +
                                    cal.back().to_string() + " for h=" + std::to_string(h));
            }
            // Every month in the truncated span must have trading days.
            {
                std::vector<std::string> missing;
                for (Month mm = config.start + 1; mm <= last_formation + h; ++mm) {
                    std::size_t a = cal.lower_bound(mm.first_day());
                    if (a >= cal.size() || Month::of(cal[a]) != mm) {
                        missing.push_back(mm.to_string());
                    }
                }
                if (!missing.empty()) {
                    std::string list;
                    for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
                    throw CoverageError("calendar has no trading days in: " + list);
                }
            }
            result.manifest.series_end[h] = last_formation;

            for (Month m = config.start; m <= last_formation; ++m) {
                EvalWindow window = evaluation_window(m, h, cal);
                GroupAssignment groups = form_peer_groups(emissions, returns.firm_ids,
                                                          m, config.q_lo, config.q_hi);

                const std::vector<std::pair<std::string, const std::vector<std::string>*>>
                    group_list = {{"brown", &groups.brown},
                                  {"green", &groups.green},
                                  {"neutral", &groups.neutral}};
                for (const auto& [gname, firms] : group_list) {
                    // Formation-time members still observable over the window.
                    std::vector<std::size_t> members;
                    for (const auto& firm : *firms) {
                        std::size_t col = returns.firm_index(firm);
                        int obs = 0;
                        for (std::size_t d = window.first; d <= window.last; ++d) {
                            if (returns.present(static_cast<Eigen::Index>(d),
                                                static_cast<Eigen::Index>(col))) {
                                ++obs;
                            }
                        }
                        if (obs >= config.min_obs) members.push_back(col);
                    }
                    if (members.size() < 11) {
                        throw InsufficientDataError(
                            "group " + gname + " at " + m.to_string() + " has only " +
                            std::to_string(members.size()) +
                            " eligible firms (need >= 11 for the ratio estimator)");
                    }

                    auto tests = group_pair_tests(returns, aligned, members, window,
                                                  config.min_obs, exec);
                    std::vector<std::uint64_t> keys;
                    keys.reserve(members.size());
                    for (std::size_t col : members) {
                        keys.push_back(CounterRng::derive_key(
                            config.seed,
                            {static_cast<std::uint64_t>(model), static_cast<std::uint64_t>(h),
                             static_cast<std::uint64_t>(m.index), group_id(gname),
                             static_cast<std::uint64_t>(col)}));
                    }
                    auto triples = group_ratio_triples(tests, members.size(), keys,
                                                       config.gamma, config.lambda_grid,
                                                       exec);
                    GroupMonthRow row;
                    row.model = model;
                    row.horizon = h;
                    row.month = m;
                    row.group = gname;
                    row.agg = aggregate_ratios(triples);
                    row.agg.formation_month = m;
                    row.agg.horizon = h;
                    result.rows.push_back(std::move(row));
                }
            }
        }
    }

    // Assemble series per (model, horizon, group, metric).
    for (FactorModel model : config.models) {
        for (int h : config.horizons) {
            for (const char* gname_c : {"brown", "green", "neutral"}) {
                const std::string g = gname_c;
                for (SeriesMetric metric : {SeriesMetric::heterogeneity,
                                            SeriesMetric::pi_minus, SeriesMetric::pi_plus}) {
                    RatioSeries s;
                    s.group = g;
                    s.horizon = h;
                    s.metric = metric;
                    s.model = to_string(model);
                    for (const auto& row : result.rows) {
                        if (row.model != model || row.horizon != h || row.group != g) continue;
                        s.months.push_back(row.month);
                        double v = metric == SeriesMetric::heterogeneity
                                       ? row.agg.heterogeneity
                                       : (metric == SeriesMetric::pi_minus
                                              ? row.agg.pi_minus
                                              : row.agg.pi_plus);
                        s.values.push_back(v);
                    }
                    result.series.push_back(std::move(s));
                }
            }
        }
    }

    result.manifest.group_sizes_source = result.rows;
    result.manifest.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

void write_ratios_csv(const std::vector<GroupMonthRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "formation_month,group,horizon,model,pi0,pi_minus,pi_plus,heterogeneity,n_firms\n";
    for (const auto& r : rows) {
        out << r.month.to_string() << ',' << r.group << ',' << r.horizon << ','
            << to_string(r.model) << ',' << fmt10(r.agg.pi0) << ','
            << fmt10(r.agg.pi_minus) << ',' << fmt10(r.agg.pi_plus) << ','
            << fmt10(r.agg.heterogeneity) << ',' << r.agg.n_firms << '\n';
    }
}

std::vector<RatioSeries> read_ratio_series(const std::string& ratios_csv_path) {
    CsvTable t = read_csv(ratios_csv_path);
    std::size_t c_month = t.column("formation_month");
    std::size_t c_group = t.column("group");
    std::size_t c_h = t.column("horizon");
    std::size_t c_model = t.column("model");
    std::size_t c_pm = t.column("pi_minus");
    std::size_t c_pp = t.column("pi_plus");
    std::size_t c_het = t.column("heterogeneity");

    std::map<std::tuple<std::string, int, std::string, int>, RatioSeries> acc;
    for (const auto& row : t.rows) {
        Month m = Month::parse(row[c_month]);
        int h = std::stoi(row[c_h]);
        for (int metric = 0; metric < 3; ++metric) {
            auto key = std::make_tuple(row[c_model], h, row[c_group], metric);
            auto& s = acc[key];
            if (s.months.empty()) {
                s.model = row[c_model];
                s.horizon = h;
                s.group = row[c_group];
                s.metric = static_cast<SeriesMetric>(metric);
            }
            s.months.push_back(m);
            double v = metric == 0 ? std::stod(row[c_het])
                                   : (metric == 1 ? std::stod(row[c_pm])
                                                  : std::stod(row[c_pp]));
            s.values.push_back(v);
        }
    }
    std::vector<RatioSeries> out;
    for (auto& [key, s] : acc) out.push_back(std::move(s));
    return out;
}

void write_summary_csv(const std::vector<SeriesSummary>& summaries,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "model,metric,horizon,group,n_months,average_pct,sd_pct,min_pct,max_pct,"
           "trend_x1000,trend_se_x1000,trend_p,trend_stars,"
           "trend_ctl_x1000,trend_ctl_se_x1000,trend_ctl_p,trend_ctl_stars,"
           "trend_beta_x1000,trend_beta_se_x1000,trend_beta_p,trend_beta_stars\n";
    for (const auto& s : summaries) {
        out << s.model << ',' << to_string(s.metric) << ',' << s.horizon << ','
            << s.group << ',' << s.n_months << ',' << fmt10(s.average) << ','
            << fmt10(s.sd) << ',' << fmt10(s.minimum) << ',' << fmt10(s.maximum) << ','
            << fmt10(s.trend.slope * 1000.0) << ',' << fmt10(s.trend.se * 1000.0) << ','
            << fmt10(s.trend.p_value) << ',' << s.trend_stars << ','
            << fmt10(s.trend_with_control.slope * 1000.0) << ','
            << fmt10(s.trend_with_control.se * 1000.0) << ','
            << fmt10(s.trend_with_control.p_value) << ',' << s.trend_with_control_stars << ','
            << fmt10(s.trend_beta.slope * 1000.0) << ','
            << fmt10(s.trend_beta.se * 1000.0) << ','
            << fmt10(s.trend_beta.p_value) << ',' << s.trend_beta_stars << '\n';
    }
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    json j;
    const RunConfig& c = manifest.config;
    j["config"] = {
        {"start_month", c.start.to_string()},
        {"end_month", c.end.to_string()},
        {"horizons", c.horizons},
        {"q_lo", c.q_lo},
        {"q_hi", c.q_hi},
        {"gamma", c.gamma},
        {"lambda_grid", c.lambda_grid},
        {"min_obs", c.min_obs},
        {"seed", c.seed},
        {"returns", c.returns_path},
        {"emissions", c.emissions_path},
        {"out_dir", c.out_dir},
    };
    {
        std::vector<std::string> models;
        for (auto m : c.models) models.push_back(to_string(m));
        j["config"]["models"] = models;
    }
    j["metadata"] = {
        {"p_value_reference", "normal"},
        {"hac", "quadratic_spectral_prewhitened_ar1"},
        {"bandwidth_weights", "equal"},
        {"bootstrap_reps_pi0", 500},
        {"bootstrap_reps_trend", 2000},
    };
    for (const auto& [h, m] : manifest.series_end) {
        j["series_end"][std::to_string(h)] = m.to_string();
    }
    json sizes = json::array();
    for (const auto& r : manifest.group_sizes_source) {
        sizes.push_back({{"model", to_string(r.model)},
                         {"horizon", r.horizon},
                         {"month", r.month.to_string()},
                         {"group", r.group},
                         {"n_firms", r.agg.n_firms}});
    }
    j["group_sizes"] = sizes;
    j["version"] = manifest.version;
    j["wall_clock_seconds"] = manifest.wall_clock_seconds;

    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << j.dump(2) << '\n';
}

}  // namespace peerperf
