#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "test_util.hpp"

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args, const testutil::TempDir& tmp,
                  const std::string& env = "") {
    const std::string log = tmp.path("cli_log.txt");
    std::string cmd = env + (env.empty() ? "" : " ") + PEERPERF_CLI_PATH + " " + args +
                      " > " + log + " 2>&1";
    int status = std::system(cmd.c_str());
    CliResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = testutil::slurp(log);
    return r;
}

// One simulated 60-firm dataset shared by the test cases below.
struct Fixture {
    testutil::TempDir tmp{"cli"};
    std::string config;

    Fixture() {
        tmp.write("sim.json", R"({
            "n_firms": 60, "n_days": 218, "seed": 7,
            "frac_zero": 0.6, "frac_negative": 0.2, "frac_positive": 0.2
        })");
        CliResult sim = run_cli("simulate --spec " + tmp.path("sim.json") + " --out " +
                                    tmp.path(""),
                                tmp);
        REQUIRE(sim.exit_code == 0);
        config = tmp.write("config.json", std::string(R"({
            "start_month": "2014-01", "end_month": "2014-12",
            "horizons": [3], "models": ["carhart4"],
            "returns": ")") + tmp.path("returns.csv") + R"(",
            "factors_carhart4": ")" + tmp.path("factors_carhart4.csv") + R"(",
            "emissions": ")" + tmp.path("emissions.csv") + R"("
        })");
    }
};

Fixture& fixture() {
    static Fixture f;
    return f;
}

}  // namespace

TEST_CASE("run: produces the three output files") {
    Fixture& f = fixture();
    CliResult r = run_cli("run --config " + f.config + " --out " + f.tmp.path(""), f.tmp);
    CHECK(r.exit_code == 0);
    std::string ratios = testutil::slurp(f.tmp.path("ratios.csv"));
    CHECK(ratios.find("formation_month,group,horizon,model,") == 0);
    CHECK_FALSE(testutil::slurp(f.tmp.path("summary.csv")).empty());
    std::string manifest = testutil::slurp(f.tmp.path("manifest.json"));
    CHECK(manifest.find("\"version\"") != std::string::npos);
}

TEST_CASE("run: repeat runs are byte-identical") {
    Fixture& f = fixture();
    testutil::TempDir out_a("cli_a"), out_b("cli_b");
    CHECK(run_cli("run --config " + f.config + " --threads 1 --out " + out_a.path(""),
                  f.tmp)
              .exit_code == 0);
    CHECK(run_cli("run --config " + f.config + " --threads 4 --out " + out_b.path(""),
                  f.tmp)
              .exit_code == 0);
    CHECK(testutil::slurp(out_a.path("ratios.csv")) ==
          testutil::slurp(out_b.path("ratios.csv")));
    CHECK(testutil::slurp(out_a.path("summary.csv")) ==
          testutil::slurp(out_b.path("summary.csv")));
}

TEST_CASE("run: environment seed override lands in the manifest") {
    Fixture& f = fixture();
    testutil::TempDir out("cli_seed");
    CliResult r = run_cli("run --config " + f.config + " --out " + out.path(""), f.tmp,
                          "PEERPERF_SEED=12345");
    CHECK(r.exit_code == 0);
    CHECK(testutil::slurp(out.path("manifest.json")).find("\"seed\": 12345") !=
          std::string::npos);
}

TEST_CASE("run: missing input file exits 2 and names the path") {
    Fixture& f = fixture();
    std::string cfg = f.tmp.write("broken.json", R"({
        "returns": "/nonexistent/returns.csv",
        "factors_carhart4": "/nonexistent/factors.csv",
        "emissions": "/nonexistent/emissions.csv"
    })");
    CliResult r = run_cli("run --config " + cfg, f.tmp);
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("/nonexistent/returns.csv") != std::string::npos);
}

TEST_CASE("run: invalid horizon exits 2") {
    Fixture& f = fixture();
    CliResult r = run_cli("run --config " + f.config + " --horizon 5", f.tmp);
    CHECK(r.exit_code == 2);

    CliResult missing = run_cli("run", f.tmp);
    CHECK(missing.exit_code == 2);  // --config is required
}

TEST_CASE("summarize: builds a summary from an existing ratios file") {
    Fixture& f = fixture();
    testutil::TempDir out("cli_sum");
    REQUIRE(run_cli("run --config " + f.config + " --out " + out.path(""), f.tmp)
                .exit_code == 0);
    CliResult r = run_cli("summarize --ratios " + out.path("ratios.csv") + " --out " +
                              out.path("resummary.csv"),
                          f.tmp);
    CHECK(r.exit_code == 0);
    std::string direct = testutil::slurp(out.path("summary.csv"));
    std::string rebuilt = testutil::slurp(out.path("resummary.csv"));
    CHECK(direct == rebuilt);
}

TEST_CASE("plot: renders an SVG with a series path and a trend path") {
    Fixture& f = fixture();
    testutil::TempDir out("cli_plot");
    REQUIRE(run_cli("run --config " + f.config + " --out " + out.path(""), f.tmp)
                .exit_code == 0);
    CliResult r = run_cli("plot --ratios " + out.path("ratios.csv") +
                              " --metric heterogeneity --group brown --horizon 3 --out " +
                              out.path("plot.svg"),
                          f.tmp);
    CHECK(r.exit_code == 0);
    std::string svg = testutil::slurp(out.path("plot.svg"));
    CHECK(svg.find("<svg") != std::string::npos);
    std::size_t paths = 0, pos = 0;
    while ((pos = svg.find("<path", pos)) != std::string::npos) {
        ++paths;
        pos += 5;
    }
    CHECK(paths == 2);

    CliResult miss = run_cli("plot --ratios " + out.path("ratios.csv") +
                                 " --metric heterogeneity --group brown --horizon 12",
                             f.tmp);
    CHECK(miss.exit_code == 2);
    CHECK(miss.output.find("available series") != std::string::npos);
}

TEST_CASE("ingest-check: clean and broken inputs") {
    Fixture& f = fixture();
    CliResult ok = run_cli("ingest-check --returns " + f.tmp.path("returns.csv") +
                               " --factors " + f.tmp.path("factors_carhart4.csv") +
                               " --emissions " + f.tmp.path("emissions.csv") +
                               " --report " + f.tmp.path("report.json"),
                           f.tmp);
    CHECK(ok.exit_code == 0);
    CHECK(testutil::slurp(f.tmp.path("report.json")).find("\"ok\": true") !=
          std::string::npos);

    std::string bad = f.tmp.write("bad_returns.csv",
                                  "date,firm_id,ret\n2020-01-02,A,zebra\n");
    CliResult broken = run_cli("ingest-check --returns " + bad + " --report " +
                                   f.tmp.path("bad_report.json"),
                               f.tmp);
    CHECK(broken.exit_code == 2);
    CHECK(testutil::slurp(f.tmp.path("bad_report.json")).find("\"ok\": false") !=
          std::string::npos);
}

TEST_CASE("simulate: truth file lists every firm") {
    Fixture& f = fixture();
    std::string truth = testutil::slurp(f.tmp.path("truth.json"));
    CHECK(truth.find("F0000") != std::string::npos);
    CHECK(truth.find("F0059") != std::string::npos);
    CHECK(truth.find("\"seed\": 7") != std::string::npos);
}
