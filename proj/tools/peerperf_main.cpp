// Command-line surface for the peer-performance ratio pipeline.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "peerperf/errors.hpp"
#include "peerperf/ingest.hpp"
#include "peerperf/pipeline.hpp"
#include "peerperf/svg.hpp"
#include "peerperf/synth.hpp"

namespace pp = peerperf;
using nlohmann::json;

namespace {

std::uint64_t env_seed_override(std::uint64_t fallback) {
    const char* env = std::getenv("PEERPERF_SEED");
    if (!env || !*env) return fallback;
    return std::strtoull(env, nullptr, 10);
}

std::map<pp::FactorModel, pp::FactorPanel> load_factor_panels(const pp::RunConfig& cfg) {
    std::map<pp::FactorModel, pp::FactorPanel> out;
    for (pp::FactorModel m : cfg.models) {
        const std::string& path = m == pp::FactorModel::carhart4
                                      ? cfg.factors_carhart4_path
                                      : cfg.factors_ff5_path;
        if (path.empty()) {
            throw pp::ValidationError("no factor file configured for model " +
                                      pp::to_string(m));
        }
        out.emplace(m, pp::load_factor_panel(path, m));
    }
    return out;
}

int cmd_run(const std::string& config_path, const std::vector<int>& horizons,
            const std::vector<std::string>& models, std::optional<std::uint64_t> seed,
            int threads, const std::string& out_dir) {
    pp::RunConfig cfg = pp::load_run_config(config_path);
    if (!horizons.empty()) cfg.horizons = horizons;
    if (!models.empty()) {
        cfg.models.clear();
        for (const auto& m : models) cfg.models.push_back(pp::factor_model_from_string(m));
    }
    if (seed) cfg.seed = *seed;
    cfg.seed = env_seed_override(cfg.seed);
    if (threads > 0) cfg.threads = threads;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    pp::validate(cfg);

    pp::ReturnPanel returns = pp::load_return_panel(cfg.returns_path);
    auto factors = load_factor_panels(cfg);
    pp::EmissionsTable emissions = pp::load_emissions(cfg.emissions_path);

    pp::BacktestResult result = pp::run_backtest(cfg, returns, factors, emissions);

    pp::write_ratios_csv(result.rows, cfg.out_dir + "/ratios.csv");
    // Summarize the published CSV (not the in-memory series) so `run` and a
    // later `summarize` on the same file produce identical bytes.
    pp::write_summary_csv(
        pp::summarize_series(pp::read_ratio_series(cfg.out_dir + "/ratios.csv")),
        cfg.out_dir + "/summary.csv");
    pp::write_manifest(result.manifest, cfg.out_dir + "/manifest.json");
    return 0;
}

int cmd_summarize(const std::string& ratios_path, const std::string& out_path) {
    auto series = pp::read_ratio_series(ratios_path);
    pp::write_summary_csv(pp::summarize_series(series), out_path);
    return 0;
}

int cmd_simulate(const std::string& spec_path, const std::string& out_dir) {
    std::ifstream in(spec_path);
    if (!in) throw pp::ParseError("cannot open file: " + spec_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw pp::ParseError(spec_path + ": " + e.what());
    }

    pp::SimSpec spec;
    if (j.contains("n_firms")) spec.n_firms = j["n_firms"];
    if (j.contains("n_days")) spec.n_days = j["n_days"];
    if (j.contains("n_factors")) spec.n_factors = j["n_factors"];
    if (j.contains("factor_vol")) spec.factor_vol = j["factor_vol"];
    if (j.contains("residual_vol")) spec.residual_vol = j["residual_vol"];
    if (j.contains("cross_residual_corr")) spec.cross_residual_corr = j["cross_residual_corr"];
    if (j.contains("frac_zero")) spec.frac_zero = j["frac_zero"];
    if (j.contains("frac_negative")) spec.frac_negative = j["frac_negative"];
    if (j.contains("frac_positive")) spec.frac_positive = j["frac_positive"];
    if (j.contains("alpha_negative")) spec.alpha_negative = j["alpha_negative"];
    if (j.contains("alpha_positive")) spec.alpha_positive = j["alpha_positive"];
    if (j.contains("start_date")) spec.start_date = pp::Date::parse(j["start_date"]);
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    spec.seed = env_seed_override(spec.seed);

    pp::SimPanel panel = pp::simulate_panel(spec);
    pp::write_return_panel(panel.returns, out_dir + "/returns.csv");
    const std::string factors_name = panel.factors.model_id == pp::FactorModel::ff5
                                         ? "factors_ff5.csv"
                                         : "factors_carhart4.csv";
    pp::write_factor_panel(panel.factors, out_dir + "/" + factors_name);
    pp::write_emissions(panel.emissions, out_dir + "/emissions.csv");

    json truth;
    truth["firm_ids"] = panel.truth.firm_ids;
    truth["alphas"] = panel.truth.alphas;
    truth["seed"] = spec.seed;
    std::ofstream tout(out_dir + "/truth.json");
    if (!tout) throw pp::Error("cannot write " + out_dir + "/truth.json");
    tout << truth.dump(2) << '\n';
    return 0;
}

int cmd_plot(const std::string& ratios_path, const std::string& metric,
             const std::string& group, int horizon, const std::string& model,
             const std::string& out_path) {
    auto series = pp::read_ratio_series(ratios_path);
    pp::SeriesMetric m = pp::series_metric_from_string(metric);
    for (const auto& s : series) {
        if (s.metric == m && s.group == group && s.horizon == horizon &&
            (model.empty() || s.model == model)) {
            std::string title = s.group + " " + pp::to_string(s.metric) + " (h=" +
                                std::to_string(s.horizon) + ", " + s.model + ")";
            pp::write_ratio_svg(s, title, out_path);
            return 0;
        }
    }
    std::cerr << "error: no series (" << metric << ", " << group << ", h=" << horizon
              << ", " << model << ") in " << ratios_path << "\navailable series:\n";
    for (const auto& s : series) {
        if (s.metric != pp::SeriesMetric::heterogeneity) continue;
        std::cerr << "  group=" << s.group << " horizon=" << s.horizon
                  << " model=" << s.model
                  << " metrics=heterogeneity,pi_minus,pi_plus\n";
    }
    return 2;
}

int cmd_ingest_check(const std::string& returns_path, const std::string& factors_path,
                     const std::string& model, const std::string& emissions_path,
                     const std::string& report_path) {
    json report;
    report["ok"] = true;
    auto record = [&](const std::string& key, const std::function<void(json&)>& fn) {
        json entry;
        try {
            fn(entry);
            entry["ok"] = true;
        } catch (const std::exception& e) {
            entry["ok"] = false;
            entry["error"] = e.what();
            report["ok"] = false;
        }
        report[key] = entry;
    };

    if (!returns_path.empty()) {
        record("returns", [&](json& e) {
            pp::ReturnPanel p = pp::load_return_panel(returns_path);
            e["days"] = p.calendar.size();
            e["firms"] = p.firm_ids.size();
            std::size_t missing = 0;
            for (Eigen::Index d = 0; d < p.returns.rows(); ++d) {
                for (Eigen::Index f = 0; f < p.returns.cols(); ++f) {
                    if (!p.present(d, f)) ++missing;
                }
            }
            e["missing_cells"] = missing;
        });
    }
    if (!factors_path.empty()) {
        record("factors", [&](json& e) {
            pp::FactorPanel p =
                pp::load_factor_panel(factors_path, pp::factor_model_from_string(model));
            e["days"] = p.calendar.size();
            e["k"] = p.k();
        });
    }
    if (!emissions_path.empty()) {
        record("emissions", [&](json& e) {
            pp::EmissionsTable t = pp::load_emissions(emissions_path);
            e["records"] = t.records.size();
        });
    }

    std::ofstream out(report_path);
    if (!out) throw pp::Error("cannot write " + report_path);
    out << report.dump(2) << '\n';
    return report["ok"].get<bool>() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Peer-performance ratios for GHG-intensity peer groups"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run the monthly ratio pipeline");
    std::string run_config, run_out;
    std::vector<int> run_horizons;
    std::vector<std::string> run_models;
    std::uint64_t run_seed = 0;
    bool run_seed_set = false;
    int run_threads = 0;
    run->add_option("--config", run_config, "JSON config file")->required();
    run->add_option("--horizon", run_horizons, "Evaluation horizon(s) in months")
        ->check(CLI::IsMember({3, 6, 12}).description("horizon must be one of 3,6,12"));
    run->add_option("--model", run_models, "Factor model(s): carhart4, ff5");
    run->add_option("--seed", run_seed, "Root seed")->each([&](const std::string&) {
        run_seed_set = true;
    });
    run->add_option("--threads", run_threads, "Worker thread cap");
    run->add_option("--out", run_out, "Output directory");

    // summarize
    auto* summarize = app.add_subcommand("summarize", "Summary table from ratios.csv");
    std::string sum_ratios, sum_out = "summary.csv";
    summarize->add_option("--ratios", sum_ratios, "ratios.csv path")->required();
    summarize->add_option("--out", sum_out, "Output summary.csv path");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic panel");
    std::string sim_spec, sim_out = ".";
    simulate->add_option("--spec", sim_spec, "JSON simulation spec")->required();
    simulate->add_option("--out", sim_out, "Output directory");

    // plot
    auto* plot = app.add_subcommand("plot", "Render a ratio series to SVG");
    std::string plot_ratios, plot_metric = "heterogeneity", plot_group = "brown";
    std::string plot_model, plot_out = "plot.svg";
    int plot_horizon = 3;
    plot->add_option("--ratios", plot_ratios, "ratios.csv path")->required();
    plot->add_option("--metric", plot_metric, "heterogeneity, pi_minus, or pi_plus");
    plot->add_option("--group", plot_group, "brown, green, or neutral");
    plot->add_option("--horizon", plot_horizon, "Horizon in months");
    plot->add_option("--model", plot_model, "Factor model filter");
    plot->add_option("--out", plot_out, "Output SVG path");

    // ingest-check
    auto* check = app.add_subcommand("ingest-check", "Validate input files");
    std::string chk_returns, chk_factors, chk_model = "carhart4", chk_emissions;
    std::string chk_report = "ingest_report.json";
    check->add_option("--returns", chk_returns, "returns.csv path");
    check->add_option("--factors", chk_factors, "factor csv path");
    check->add_option("--factor-model", chk_model, "Model for the factor file");
    check->add_option("--emissions", chk_emissions, "emissions.csv path");
    check->add_option("--report", chk_report, "Report output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) {
            return cmd_run(run_config, run_horizons, run_models,
                           run_seed_set ? std::optional<std::uint64_t>(run_seed)
                                        : std::nullopt,
                           run_threads, run_out);
        }
        if (summarize->parsed()) return cmd_summarize(sum_ratios, sum_out);
        if (simulate->parsed()) return cmd_simulate(sim_spec, sim_out);
        if (plot->parsed()) {
            return cmd_plot(plot_ratios, plot_metric, plot_group, plot_horizon,
                            plot_model, plot_out);
        }
        if (check->parsed()) {
            return cmd_ingest_check(chk_returns, chk_factors, chk_model, chk_emissions,
                                    chk_report);
        }
    } catch (const pp::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const pp::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const pp::SchemaError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const pp::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
