// Serial reference kernels against the OpenMP kernels, plus two end-to-end
// paths (network forward pass and torus Poisson solve).
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pinr/baseline.hpp"
#include "pinr/kernels.hpp"
#include "pinr/mrnet.hpp"
#include "pinr/runtime.hpp"

namespace k = pinr::kernels;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

template <bool kParallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 1), b = random_vector(n * n, 2);
  std::vector<double> c(n * n);
  const auto va = k::MatrixView::of(a.data(), n, n), vb = k::MatrixView::of(b.data(), n, n);
  for (auto _ : state) {
    if constexpr (kParallel) {
      k::gemm(va, vb, c);
    } else {
      k::reference::gemm(va, vb, c);
    }
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

template <bool kParallel>
void BM_Sin(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n, 3);
  std::vector<double> out(n);
  for (auto _ : state) {
    if constexpr (kParallel) {
      k::sin(a, out);
    } else {
      k::reference::sin(a, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool kParallel>
void BM_Sum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n, 4);
  for (auto _ : state) {
    double s = kParallel ? k::sum(a) : k::reference::sum(a);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <bool kParallel>
void BM_Laplacian(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x = random_vector(n * n, 5);
  std::vector<double> y(n * n);
  for (auto _ : state) {
    if constexpr (kParallel) {
      k::neg_laplacian_torus(x, y, n, n);
    } else {
      k::reference::neg_laplacian_torus(x, y, n, n);
    }
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

void BM_MrNetForward(benchmark::State& state) {
  const pinr::MrNet net =
      pinr::init_mrnet({{4, 4, 40, {64}}, {16, 16, 160, {128}}}, pinr::Period{}, 3, 1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const pinr::diff::Tensor coords({n, 2}, random_vector(2 * n, 6));
  for (auto _ : state) {
    auto out = pinr::mrnet_eval(net, coords, 2.0);
    benchmark::DoNotOptimize(out);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

void BM_PoissonTorus(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  pinr::ImageGrid img(n, n, 3);
  img.data = random_vector(n * n * 3, 7);
  const pinr::GuidanceField u = pinr::forward_gradient(img, true);
  const std::vector<double> mean(3, 0.0);
  for (auto _ : state) {
    auto r = pinr::solve_torus(u, mean, {1e-8, 20000});
    benchmark::DoNotOptimize(r.image.data.data());
  }
}

}  // namespace

BENCHMARK(BM_Gemm<false>)->Name("gemm/serial")->Arg(64)->Arg(256);
BENCHMARK(BM_Gemm<true>)->Name("gemm/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_Sin<false>)->Name("sin/serial")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Sin<true>)->Name("sin/parallel")->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_Sum<false>)->Name("sum/serial")->Arg(1 << 20);
BENCHMARK(BM_Sum<true>)->Name("sum/parallel")->Arg(1 << 20);
BENCHMARK(BM_Laplacian<false>)->Name("laplacian/serial")->Arg(256)->Arg(1024);
BENCHMARK(BM_Laplacian<true>)->Name("laplacian/parallel")->Arg(256)->Arg(1024);
BENCHMARK(BM_MrNetForward)->Arg(16384);
BENCHMARK(BM_PoissonTorus)->Arg(64)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
  pinr::configure_allocator();
  benchmark::Initialize(&argc, argv);
  if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
  benchmark::RunSpecifiedBenchmarks();
  benchmark::Shutdown();
  return 0;
}
