#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "avfd/evaluation.hpp"
#include "avfd/mel.hpp"
#include "avfd/mmdwl.hpp"
#include "avfd/perturbations.hpp"
#include "avfd/rng.hpp"

using namespace avfd;

namespace {

void BM_MelSpectrogram(benchmark::State& state) {
  Waveform wav;
  wav.rate_hz = 16000;
  const auto seconds = static_cast<int>(state.range(0));
  for (int i = 0; i < seconds * 16000; ++i) {
    wav.samples.push_back(
        0.3 * std::sin(2.0 * std::numbers::pi * 440.0 * i / 16000.0));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_mel_spectrogram(wav));
  }
  state.SetItemsProcessed(state.iterations() * wav.samples.size());
}
BENCHMARK(BM_MelSpectrogram)->Arg(1)->Arg(5);

void BM_AlignmentLoss(benchmark::State& state) {
  const auto frames = state.range(0);
  const Matrix v = gaussian_matrix(1, frames, 512, 1.0);
  const Matrix a = gaussian_matrix(2, frames, 512, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        av_alignment_loss(alignment_matrix(v, a, 0.1, 15)));
  }
}
BENCHMARK(BM_AlignmentLoss)->Arg(10)->Arg(50)->Arg(200);

void BM_AlignmentBackward(benchmark::State& state) {
  const auto frames = state.range(0);
  const Matrix v = gaussian_matrix(3, frames, 512, 1.0);
  const Matrix a = gaussian_matrix(4, frames, 512, 1.0);
  Matrix dv, da;
  for (auto _ : state) {
    av_alignment_loss_backward(v, a, 0.1, 15, &dv, &da);
    benchmark::DoNotOptimize(dv);
  }
}
BENCHMARK(BM_AlignmentBackward)->Arg(10)->Arg(50);

void BM_Corruption(benchmark::State& state) {
  static const char* kinds[] = {"blur", "compress", "noise:seed=1",
                                "pixelation", "resize", "invert"};
  const CorruptionSpec spec =
      CorruptionSpec::parse(kinds[state.range(0)]);
  std::mt19937 rng(9);
  Image img(224, 224, 3);
  for (auto& p : img.data) p = static_cast<std::uint8_t>(rng());
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_corruption(img, spec));
  }
  state.SetLabel(spec.describe());
  state.SetBytesProcessed(state.iterations() * img.data.size());
}
BENCHMARK(BM_Corruption)->DenseRange(0, 5);

void BM_RocAuc(benchmark::State& state) {
  const auto n = state.range(0);
  std::mt19937 rng(11);
  std::vector<double> scores(n);
  std::vector<Label> labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    scores[i] = std::uniform_real_distribution<double>()(rng);
    labels[i] = rng() % 2 ? Label::kFake : Label::kReal;
  }
  labels[0] = Label::kReal;
  labels[1] = Label::kFake;
  for (auto _ : state) {
    benchmark::DoNotOptimize(roc_auc(scores, labels));
  }
}
BENCHMARK(BM_RocAuc)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
