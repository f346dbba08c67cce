#pragma once

#include "avfd/audio.hpp"
#include "avfd/types.hpp"

namespace avfd {

struct MelParams {
  int n_mels = 80;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  double log_floor = 1e-10;
};

/// Mel-frequency conversions (Slaney/HTK-style 2595*log10(1+f/700)).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular mel filterbank over an FFT of size n_fft at the given rate.
/// Rows are filters, columns are the n_fft/2+1 magnitude bins.
Matrix mel_filterbank(int n_mels, int n_fft, int rate_hz);

/// Log-magnitude mel spectrogram: one row per analysis frame (Hann window,
/// 25 ms / 10 ms by default), one column per mel bin. Deterministic.
/// Throws EmptyAudio on an empty waveform.
Matrix compute_mel_spectrogram(const Waveform& wav,
                               const MelParams& params = {});

}  // namespace avfd
