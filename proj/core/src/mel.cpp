#include "avfd/mel.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <vector>

namespace avfd {

namespace {

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// FFTW planning is not thread-safe; execution of independent plans is.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

Matrix mel_filterbank(int n_mels, int n_fft, int rate_hz) {
  const int n_bins = n_fft / 2 + 1;
  const double mel_max = hz_to_mel(rate_hz / 2.0);
  std::vector<double> edges(static_cast<std::size_t>(n_mels) + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_max * i / (n_mels + 1));
  }
  Matrix fb = Matrix::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double lo = edges[m], cen = edges[m + 1], hi = edges[m + 2];
    for (int b = 0; b < n_bins; ++b) {
      const double f = static_cast<double>(b) * rate_hz / n_fft;
      if (f <= lo || f >= hi) continue;
      fb(m, b) = f <= cen ? (f - lo) / (cen - lo) : (hi - f) / (hi - cen);
    }
  }
  return fb;
}

Matrix compute_mel_spectrogram(const Waveform& wav, const MelParams& params) {
  if (wav.samples.empty()) throw EmptyAudio("empty waveform");
  if (wav.rate_hz <= 0) throw InvalidSpec("sample rate must be positive");

  const int win = std::max(1, static_cast<int>(
      std::lround(wav.rate_hz * params.window_ms / 1000.0)));
  const int hop = std::max(1, static_cast<int>(
      std::lround(wav.rate_hz * params.hop_ms / 1000.0)));
  const int n_fft = next_pow2(win);
  const int n_bins = n_fft / 2 + 1;
  const auto n = static_cast<int>(wav.samples.size());
  const int n_frames = n >= win ? 1 + (n - win) / hop : 1;

  std::vector<double> hann(win);
  for (int i = 0; i < win; ++i) {
    hann[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (win - 1));
  }
  if (win == 1) hann[0] = 1.0;

  std::vector<double> buf(n_fft, 0.0);
  std::vector<fftw_complex> spec(static_cast<std::size_t>(n_bins));
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    plan = fftw_plan_dft_r2c_1d(n_fft, buf.data(), spec.data(), FFTW_ESTIMATE);
  }

  const Matrix fb = mel_filterbank(params.n_mels, n_fft, wav.rate_hz);
  Matrix out(n_frames, params.n_mels);
  Vector mag(n_bins);
  for (int t = 0; t < n_frames; ++t) {
    const int start = t * hop;
    for (int i = 0; i < n_fft; ++i) {
      const int s = start + i;
      buf[i] = (i < win && s < n) ? wav.samples[s] * hann[i] : 0.0;
    }
    fftw_execute(plan);
    for (int b = 0; b < n_bins; ++b) {
      mag(b) = std::hypot(spec[b][0], spec[b][1]);
    }
    const Vector energy = fb * mag;
    for (int m = 0; m < params.n_mels; ++m) {
      out(t, m) = std::log(std::max(energy(m), params.log_floor));
    }
  }
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace avfd
