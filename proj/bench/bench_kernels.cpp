// Serial reference vs OpenMP kernels, plus the end-to-end Ward and Apriori
// paths under each backend.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cohortlens/analytics.hpp"
#include "cohortlens/arm.hpp"
#include "cohortlens/cluster.hpp"
#include "cohortlens/kernels.hpp"
#include "cohortlens/synth.hpp"

using namespace cohortlens;
using kernels::Backend;

namespace {

std::vector<std::uint32_t> random_masks(std::size_t n, int bits, std::uint32_t seed, double density) {
  std::mt19937 rng(seed);
  std::bernoulli_distribution on(density);
  std::vector<std::uint32_t> out(n);
  for (auto& m : out) {
    for (int b = 0; b < bits; ++b) {
      if (on(rng)) m |= 1u << b;
    }
  }
  return out;
}

std::vector<double> random_matrix(std::size_t rows, std::size_t cols) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::vector<double> out(rows * cols);
  for (auto& v : out) v = u(rng);
  return out;
}

Backend backend_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Backend::Serial : Backend::OpenMP;
}

void BM_CountSupport(benchmark::State& state) {
  const auto tx = random_masks(5000, 28, 1, 0.4);
  const auto cand = random_masks(2000, 28, 2, 0.08);
  std::vector<std::uint32_t> counts(cand.size());
  const auto backend = backend_of(state);
  for (auto _ : state) {
    kernels::count_support(tx, cand, counts, backend);
    benchmark::DoNotOptimize(counts.data());
  }
}
BENCHMARK(BM_CountSupport)->Arg(0)->Arg(1)->ArgName("omp");

void BM_WardInit(benchmark::State& state) {
  const std::size_t rows = 700;
  const std::size_t cols = 28;
  const auto data = random_matrix(rows, cols);
  std::vector<double> out(rows * rows);
  const auto backend = backend_of(state);
  for (auto _ : state) {
    kernels::ward_init(data, rows, cols, out, backend);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_WardInit)->Arg(0)->Arg(1)->ArgName("omp");

void BM_MinActivePair(benchmark::State& state) {
  const std::size_t n = 700;
  const auto data = random_matrix(n, 28);
  std::vector<double> dist(n * n);
  kernels::ward_init_serial(data, n, 28, dist);
  std::vector<std::uint8_t> active(n, 1);
  const auto backend = backend_of(state);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::min_active_pair(dist, n, active, backend));
  }
}
BENCHMARK(BM_MinActivePair)->Arg(0)->Arg(1)->ArgName("omp");

void BM_RatingHistogram(benchmark::State& state) {
  const std::size_t rows = 700;
  const std::size_t cols = 28 * 12;
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> r(0, 11);
  std::vector<std::uint8_t> cells(rows * cols);
  for (auto& c : cells) {
    const int v = r(rng);
    c = v == 11 ? kernels::kNotReported : static_cast<std::uint8_t>(v);
  }
  std::vector<std::uint32_t> out(cols * 11);
  const auto backend = backend_of(state);
  for (auto _ : state) {
    kernels::rating_histogram(cells, rows, cols, out, backend);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_RatingHistogram)->Arg(0)->Arg(1)->ArgName("omp");

const LoadedDataset& cohort() {
  static const auto data = [] {
    const auto c = synth::generate({});
    return LoadedDataset::from_csv(c.patients_csv, c.ratings_csv);
  }();
  return *data;
}

void BM_WardCluster(benchmark::State& state) {
  std::vector<std::size_t> all(kSymptomCount);
  for (std::size_t s = 0; s < kSymptomCount; ++s) all[s] = s;
  const auto m = cluster::build_matrix(cohort().imputed, 0, all);
  kernels::set_default_backend(backend_of(state));
  for (auto _ : state) benchmark::DoNotOptimize(cluster::ward_cluster(m, 2));
  kernels::set_default_backend(Backend::OpenMP);
}
BENCHMARK(BM_WardCluster)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);

void BM_MineRules(benchmark::State& state) {
  arm::MiningParams params;
  params.phase = Phase::Acute;
  kernels::set_default_backend(backend_of(state));
  for (auto _ : state) benchmark::DoNotOptimize(arm::mine_rules(cohort().raw, params));
  kernels::set_default_backend(Backend::OpenMP);
}
BENCHMARK(BM_MineRules)->Arg(0)->Arg(1)->ArgName("omp")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
