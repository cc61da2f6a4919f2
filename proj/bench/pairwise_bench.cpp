// Timing comparison of the serial and OpenMP pairwise-test kernels, plus a
// check that both executions produce identical results.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "peerperf/pipeline.hpp"
#include "peerperf/synth.hpp"

using namespace peerperf;

namespace {

double time_run(const ReturnPanel& panel, const Eigen::MatrixXd& factors,
                const std::vector<std::size_t>& members, const EvalWindow& window,
                Execution exec, std::vector<PairTest>* out) {
    const auto t0 = std::chrono::steady_clock::now();
    *out = group_pair_tests(panel, factors, members, window, 60, exec);
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    int n_firms = argc > 1 ? std::atoi(argv[1]) : 80;
    int n_days = argc > 2 ? std::atoi(argv[2]) : 252;
    int reps = argc > 3 ? std::atoi(argv[3]) : 3;

    SimSpec spec;
    spec.n_firms = n_firms;
    spec.n_days = n_days;
    spec.frac_zero = 0.6;
    spec.frac_negative = 0.2;
    spec.frac_positive = 0.2;
    SimPanel panel = simulate_panel(spec);

    std::vector<std::size_t> members(static_cast<std::size_t>(n_firms));
    for (std::size_t i = 0; i < members.size(); ++i) members[i] = i;
    EvalWindow window{0, static_cast<std::size_t>(n_days - 1), n_days};

    std::printf("pairwise kernel: %d firms (%zu pairs), %d days, %d threads\n",
                n_firms, members.size() * (members.size() - 1) / 2, n_days,
                omp_get_max_threads());

    std::vector<PairTest> serial, parallel;
    double best_serial = 1e9, best_parallel = 1e9;
    for (int r = 0; r < reps; ++r) {
        best_serial = std::min(
            best_serial,
            time_run(panel.returns, panel.factors.factors, members, window,
                     Execution::serial, &serial));
        best_parallel = std::min(
            best_parallel,
            time_run(panel.returns, panel.factors.factors, members, window,
                     Execution::parallel, &parallel));
    }

    bool identical = serial.size() == parallel.size();
    for (std::size_t p = 0; identical && p < serial.size(); ++p) {
        identical = serial[p].delta_alpha == parallel[p].delta_alpha &&
                    serial[p].hac_se == parallel[p].hac_se &&
                    serial[p].p_value == parallel[p].p_value;
    }

    std::printf("serial:   %8.1f ms\n", best_serial * 1e3);
    std::printf("parallel: %8.1f ms  (speedup %.2fx)\n", best_parallel * 1e3,
                best_serial / best_parallel);
    std::printf("results identical: %s\n", identical ? "yes" : "NO");
    return identical ? 0 : 1;
}
