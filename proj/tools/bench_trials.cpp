// Times the Monte Carlo trial runner in its serial and OpenMP forms on the
// same workload and checks that the aggregated results are bit-identical.
#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "wsc/linalg.hpp"
#include "wsc/simulation.hpp"

namespace {

double run_once(wsc::StudyConfig cfg, bool serial, int threads,
                std::vector<wsc::StudyRow>* rows) {
    cfg.serial_reference = serial;
    cfg.threads = threads;
    const auto t0 = std::chrono::steady_clock::now();
    *rows = wsc::run_convergence_study(cfg);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    wsc::linalg::pin_blas_single_thread();

    Eigen::Index p = 300;
    int trials = 32;
    int threads = 4;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--p"))
            p = std::atol(argv[i + 1]);
        else if (!std::strcmp(argv[i], "--trials"))
            trials = std::atoi(argv[i + 1]);
        else if (!std::strcmp(argv[i], "--threads"))
            threads = std::atoi(argv[i + 1]);
        else {
            std::fprintf(stderr, "usage: bench_trials [--p P] [--trials N] [--threads K]\n");
            return 1;
        }
    }

    wsc::StudyConfig cfg;
    cfg.seed = 20260826;
    wsc::StudyPoint point;
    point.p = p;
    point.noise.kind = wsc::NoiseDistribution::Kind::Gaussian;
    point.n_trials = trials;
    cfg.points.push_back(point);

    std::vector<wsc::StudyRow> serial_rows, parallel_rows;
    const double t_serial = run_once(cfg, true, 1, &serial_rows);
    const double t_parallel = run_once(cfg, false, threads, &parallel_rows);

    bool identical = serial_rows.size() == parallel_rows.size();
    for (std::size_t i = 0; identical && i < serial_rows.size(); ++i)
        identical = serial_rows[i].mean == parallel_rows[i].mean &&
                    serial_rows[i].stderr_ == parallel_rows[i].stderr_;

    std::printf("p=%ld trials=%d threads=%d\n", static_cast<long>(p), trials, threads);
    std::printf("serial    %.3f s  (%.1f ms/trial)\n", t_serial, 1e3 * t_serial / trials);
    std::printf("openmp    %.3f s  (%.1f ms/trial)\n", t_parallel, 1e3 * t_parallel / trials);
    std::printf("speedup   %.2fx\n", t_serial / t_parallel);
    std::printf("results   %s\n", identical ? "identical" : "DIFFER");
    return identical ? 0 : 1;
}
