#include <benchmark/benchmark.h>

#include <cmath>

#include "lipmom/kernels.hpp"

namespace {

using namespace lipmom;

// Stand-in for one Monte-Carlo replicate: a short deterministic reduction.
double replicate_work(int d) {
  double s = 0.0;
  for (int i = 1; i <= 20000; ++i) s += std::sin(d + 1e-3 * i) / i;
  return s;
}

double rbf_entry(Eigen::Index i, Eigen::Index j) {
  const double d = 1e-3 * static_cast<double>(i - j);
  return std::exp(-d * d);
}

void BM_replicates_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::replicates(static_cast<int>(st.range(0)), replicate_work));
}
void BM_replicates_omp(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::replicates(static_cast<int>(st.range(0)), replicate_work));
}

void BM_fill_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::symmetric_fill(st.range(0), rbf_entry));
}
void BM_fill_omp(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(kernels::symmetric_fill(st.range(0), rbf_entry));
}

void BM_matvec_serial(benchmark::State& st) {
  const Eigen::MatrixXd a = kernels::symmetric_fill(st.range(0), rbf_entry);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(st.range(0), -1.0, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::symmetric_matvec(a, v));
}
void BM_matvec_omp(benchmark::State& st) {
  const Eigen::MatrixXd a = kernels::symmetric_fill(st.range(0), rbf_entry);
  const Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(st.range(0), -1.0, 1.0);
  for (auto _ : st) benchmark::DoNotOptimize(kernels::symmetric_matvec(a, v));
}

Eigen::VectorXd mercer_eigs() {
  Eigen::VectorXd ev(512);
  for (int k = 0; k < 512; ++k) ev[k] = std::pow(k + 1.0, -2.0);
  return ev;
}
void BM_features_serial(benchmark::State& st) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(st.range(0), 0.0, 1.0);
  const Eigen::VectorXd ev = mercer_eigs();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::cosine_features(x, ev));
}
void BM_features_omp(benchmark::State& st) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(st.range(0), 0.0, 1.0);
  const Eigen::VectorXd ev = mercer_eigs();
  for (auto _ : st) benchmark::DoNotOptimize(kernels::cosine_features(x, ev));
}

}  // namespace

BENCHMARK(BM_replicates_serial)->Arg(256);
BENCHMARK(BM_replicates_omp)->Arg(256);
BENCHMARK(BM_fill_serial)->Arg(1000)->Arg(2000);
BENCHMARK(BM_fill_omp)->Arg(1000)->Arg(2000);
BENCHMARK(BM_matvec_serial)->Arg(2000);
BENCHMARK(BM_matvec_omp)->Arg(2000);
BENCHMARK(BM_features_serial)->Arg(4096);
BENCHMARK(BM_features_omp)->Arg(4096);

BENCHMARK_MAIN();
