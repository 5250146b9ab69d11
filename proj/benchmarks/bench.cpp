#include "colrec/evaluation.hpp"
#include "colrec/fusion.hpp"
#include "colrec/integration.hpp"
#include "colrec/losses.hpp"
#include "colrec/phantom.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace colrec;

namespace {

Phantom BenchPhantom() {
  PhantomParams params;
  params.base_radius = 1.0;
  params.fold_amplitude = 0.15;
  params.fold_wavelength = 2.0;
  params.length = 10.0;
  return Phantom(params);
}

void BM_RenderFrame(benchmark::State& state) {
  const Phantom phantom = BenchPhantom();
  const int n = int(state.range(0));
  Intrinsics K{0.75 * n, 0.75 * n, 0.5 * n - 0.5, 0.5 * n - 0.5, n, n};
  Pose pose;
  pose.translation = Vec3(0, 0, 3.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(RenderFrame(phantom, pose, K, 2.0));
  }
}
BENCHMARK(BM_RenderFrame)->Arg(32)->Arg(64)->Arg(128);

void BM_WarpImage(benchmark::State& state) {
  const int n = int(state.range(0));
  Intrinsics K{0.75 * n, 0.75 * n, 0.5 * n - 0.5, 0.5 * n - 0.5, n, n};
  DepthMap depth(n, n, 2.0, true);
  ImageRGB image(n, n, Vec3::Constant(0.5));
  Pose pose;
  pose.translation = Vec3(0.02, 0.01, 0.05);
  for (auto _ : state) {
    benchmark::DoNotOptimize(WarpImage(image, depth, pose, K));
  }
}
BENCHMARK(BM_WarpImage)->Arg(64)->Arg(256);

void BM_LossSuite(benchmark::State& state) {
  const int n = 64;
  Intrinsics K{48, 48, 31.5, 31.5, n, n};
  const Phantom phantom = BenchPhantom();
  Pose pose_t, pose_s;
  pose_t.translation = Vec3(0, 0, 3.0);
  pose_s.translation = Vec3(0.03, 0.01, 3.1);
  const RenderedFrame ft = RenderFrame(phantom, pose_t, K, 2.0);
  const RenderedFrame fs = RenderFrame(phantom, pose_s, K, 2.0);
  InitLossInputs inputs;
  inputs.image_t = &ft.image;
  inputs.depth_t = &ft.depth;
  inputs.normals_t = &ft.normals;
  inputs.intrinsics = K;
  PairInputs pair;
  pair.image_s = &fs.image;
  pair.depth_s = &fs.depth;
  pair.normals_s = &fs.normals;
  pair.pose_t_to_s = Compose(Invert(pose_s), pose_t);
  inputs.sources.push_back(pair);
  for (auto _ : state) {
    benchmark::DoNotOptimize(LossInitTotal(inputs, LossWeights{}));
  }
}
BENCHMARK(BM_LossSuite);

void BM_IntegrateNormals(benchmark::State& state) {
  const int n = int(state.range(0));
  Intrinsics K{0.75 * n, 0.75 * n, 0.5 * n - 0.5, 0.5 * n - 0.5, n, n};
  DepthMap depth(n, n);
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      depth.Set(x, y, 2.0 + 0.2 * std::sin(0.3 * x) * std::cos(0.2 * y));
    }
  }
  const NormalMap normals = NormalsFromDepth(depth, K);
  for (auto _ : state) {
    benchmark::DoNotOptimize(IntegrateNormals(normals, K, 2.0));
  }
}
BENCHMARK(BM_IntegrateNormals)->Arg(32)->Arg(64);

void BM_Chamfer(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const size_t n = size_t(state.range(0));
  std::vector<Vec3> a, b;
  for (size_t i = 0; i < n; ++i) {
    a.emplace_back(uni(rng), uni(rng), uni(rng));
    b.emplace_back(uni(rng), uni(rng), uni(rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        ChamferDistance(a, b, ChamferDirection::kSymmetric));
  }
}
BENCHMARK(BM_Chamfer)->Arg(1000)->Arg(10000)->Arg(100000);

void BM_FuseTsdf(benchmark::State& state) {
  Intrinsics K{40, 40, 15.5, 15.5, 32, 32};
  PosedDepth frame;
  frame.depth = DepthMap(32, 32, 2.0, true);
  const TsdfConfig config =
      TsdfConfig::ForBounds(Vec3(-0.6, -0.6, 1.4), Vec3(0.6, 0.6, 2.6));
  for (auto _ : state) {
    benchmark::DoNotOptimize(FuseTsdf({frame}, K, config));
  }
}
BENCHMARK(BM_FuseTsdf);

}  // namespace

BENCHMARK_MAIN();
