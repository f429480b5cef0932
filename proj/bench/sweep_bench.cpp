// Serial reference vs OpenMP sweep, dense vs sparse steady-state solver.
//   sweep_bench [points_per_axis=6] [workers=0]

#include "qdcav/sweep.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>

#include <fmt/format.h>

namespace {

qdcav::SweepConfig bench_config(int n, qdcav::SteadySolver solver) {
  qdcav::SweepConfig cfg;
  cfg.model.g = 15;
  cfg.model.g_B = 15;
  cfg.model.delta_B = 15;
  cfg.model.gamma_X = 0.1;
  cfg.model.gamma_B = 0.1;
  cfg.model.E_R = 0.02;
  cfg.model.E_L = 0.02;
  cfg.axes = {{"g", 5, 30, n}, {"omega_R_det", -40, 40, n}};
  cfg.rules = {qdcav::parse_rule("omega_L_det", "-g")};
  cfg.solver = solver;
  return cfg;
}

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double max_diff(const qdcav::SweepResult& a, const qdcav::SweepResult& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.records.size(); ++i) d = std::max(d, std::abs(a.records[i].eof - b.records[i].eof));
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 6;
  const int workers = argc > 2 ? std::atoi(argv[2]) : 0;
  const int threads = workers > 0 ? workers : omp_get_max_threads();
  fmt::print("{}x{} grid, {} OpenMP threads\n", n, n, threads);

  for (auto solver : {qdcav::SteadySolver::dense_lu, qdcav::SteadySolver::sparse_lu}) {
    const auto cfg = bench_config(n, solver);
    qdcav::SweepResult serial, parallel;
    const double ts = seconds([&] { serial = qdcav::run_sweep_serial(cfg); });
    const double tp = seconds([&] { parallel = qdcav::run_sweep(cfg, workers); });
    fmt::print("{:9}  serial {:7.2f} s ({:.3f} s/pt)  openmp {:7.2f} s  speedup {:.2f}  max |dEoF| {:.1e}\n",
               solver == qdcav::SteadySolver::dense_lu ? "dense_lu" : "sparse_lu", ts, ts / (n * n), tp,
               ts / tp, max_diff(serial, parallel));
  }
}
