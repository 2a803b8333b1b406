#include <benchmark/benchmark.h>

#include <random>

#include "foagen/doa.hpp"
#include "foagen/flow.hpp"
#include "foagen/model.hpp"
#include "foagen/room.hpp"
#include "foagen/stft.hpp"

using namespace foagen;

namespace {

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> x(n);
  for (double& v : x) v = g(rng);
  return x;
}

void BM_Stft(benchmark::State& state) {
  const auto cfg = state.range(0) ? StftConfig::hann128() : StftConfig::paper_shape();
  const auto x = noise(16000, 1);
  for (auto _ : state) benchmark::DoNotOptimize(stft(x, cfg));
}
BENCHMARK(BM_Stft)->Arg(1)->Arg(0)->Unit(benchmark::kMicrosecond);

void BM_StftRoundTrip(benchmark::State& state) {
  const auto cfg = StftConfig::hann128();
  const auto x = noise(16000, 2);
  for (auto _ : state) benchmark::DoNotOptimize(istft(stft(x, cfg), cfg, x.size()));
}
BENCHMARK(BM_StftRoundTrip)->Unit(benchmark::kMicrosecond);

void BM_EstimateDoa(benchmark::State& state) {
  const auto grid = fibonacci_grid(static_cast<std::size_t>(state.range(0)));
  const auto a = encode_foa(noise(16000, 3), Direction(0.4, 0.2));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_doa(a, grid));
}
BENCHMARK(BM_EstimateDoa)->Arg(900)->Arg(3600)->Unit(benchmark::kMicrosecond);

void BM_ImageSourceRir(benchmark::State& state) {
  RoomSpec room;
  room.max_image_order = static_cast<int>(state.range(0));
  const Eigen::Vector3d c = room.center();
  const Eigen::Vector3d src = c + Eigen::Vector3d(1, 0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(image_source_rir(room, src, c, Eigen::Vector3d(1, 0, 0)));
}
BENCHMARK(BM_ImageSourceRir)->Arg(0)->Arg(2)->Arg(6)->Unit(benchmark::kMicrosecond);

void BM_SimulateBaseline(benchmark::State& state) {
  RoomSpec room;
  room.max_image_order = 2;
  const auto array = ArraySpec::tetrahedral();
  const auto x = noise(16000, 4);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_baseline(x, Direction(1.0, 0.1), room, array));
}
BENCHMARK(BM_SimulateBaseline)->Unit(benchmark::kMillisecond);

// Forward pass of a model of width range(0) and depth range(1) on a paper-shape
// spectrogram (8 x 64 x 128, 4 x 4 patches).
void BM_ModelForward(benchmark::State& state) {
  ModelConfig mc;
  mc.embed_dim = static_cast<int>(state.range(0));
  mc.depth = static_cast<int>(state.range(1));
  mc.heads = 4;
  mc.patch_t = 4;
  mc.patch_f = 4;
  VelocityModel model(mc);
  EncoderConfig ec;
  ec.num_classes = 3;
  ec.cond_dim = mc.cond_dim;
  const auto enc = init_encoder(ec);
  const auto c = encode_condition({1, Direction(0.3, 0.1)}, enc);
  Rng rng(5);
  const auto x = gaussian_tensor({8, 64, 128}, rng);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(x, 0.5, c));
}
BENCHMARK(BM_ModelForward)->Args({64, 2})->Args({192, 6})->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
