#include <benchmark/benchmark.h>
#include <omp.h>

#include <cmath>
#include <numbers>

#include "hypstab/transport.hpp"

using namespace hypstab;

namespace {

transport::Coefficient wavy_speed() {
  const double two_pi = 2.0 * std::numbers::pi;
  return transport::Coefficient::from_function(
      [two_pi](double, double x) { return 1.0 + 0.1 * std::sin(two_pi * x); },
      transport::Direction::positive, 1.1, 0.1 * two_pi);
}

const Profile kInitial([](double x) { return std::cos(std::numbers::pi * x); }, std::numbers::pi);
const Profile kBoundary([](double t) { return std::cos(3.0 * t); }, 3.0);

void BM_TransportSerial(benchmark::State& state) {
  const auto a = wavy_speed();
  const auto n = static_cast<std::size_t>(state.range(0));
  const UniformGrid grid{1.0, 1.0, n, n};
  for (auto _ : state) {
    benchmark::DoNotOptimize(transport::solve_linear_transport_serial(a, kInitial, kBoundary, grid));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

void BM_TransportOpenMP(benchmark::State& state) {
  const auto a = wavy_speed();
  const auto n = static_cast<std::size_t>(state.range(0));
  const UniformGrid grid{1.0, 1.0, n, n};
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(transport::solve_linear_transport(a, kInitial, kBoundary, grid));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
  state.counters["threads"] = static_cast<double>(state.range(1));
}

}  // namespace

BENCHMARK(BM_TransportSerial)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TransportOpenMP)
    ->ArgsProduct({{101, 201}, {1, 2, 4, 8}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
