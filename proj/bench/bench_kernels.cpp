// Serial reference vs OpenMP kernels. Thread count is the benchmark argument.
#include <benchmark/benchmark.h>

#include "coopriv/nvs.hpp"
#include "coopriv/sweep.hpp"

namespace {

using namespace coopriv;

SweepConfig bench_sweep() {
  SweepConfig c;
  c.suite.scenes = 4;
  c.suite.vehicles = 8;
  c.suite.duration = 20.0;
  c.rollouts_per_scene = 10;
  c.values = {0, 4, 12};
  return c;
}

void BM_SweepSerial(benchmark::State& state) {
  const SweepConfig c = bench_sweep();
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep_serial(c));
}

void BM_SweepOpenMP(benchmark::State& state) {
  const SweepConfig c = bench_sweep();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(c, threads));
}

const PointCloud& corridor() {
  static const PointCloud world = corridor_scene(60, 4, 4, 0.025);
  return world;
}

const CameraIntrinsics kCam{64, 64, 64, 48, 128, 96};

void BM_RenderSerial(benchmark::State& state) {
  const Pose pose = corridor_trajectory(1).front();
  for (auto _ : state) benchmark::DoNotOptimize(render_depth_serial(kCam, pose, corridor()));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * corridor().size()));
}

void BM_RenderOpenMP(benchmark::State& state) {
  const Pose pose = corridor_trajectory(1).front();
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(render_depth(kCam, pose, corridor(), threads));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * corridor().size()));
}

}  // namespace

BENCHMARK(BM_SweepSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SweepOpenMP)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RenderSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RenderOpenMP)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
