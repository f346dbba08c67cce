#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "avfd/audio.hpp"
#include "avfd/image.hpp"
#include "avfd/mel.hpp"
#include "test_util.hpp"

using namespace avfd;

TEST_CASE("pnm round trip preserves pixels") {
  TempDir tmp("pnm");
  std::mt19937 rng(3);
  for (const int channels : {1, 3}) {
    Image img(17, 11, channels);
    for (auto& p : img.data) p = static_cast<std::uint8_t>(rng());
    const auto path = tmp.path / (std::to_string(channels) + ".pnm");
    save_pnm(img, path);
    CHECK(load_pnm(path) == img);
  }
}

TEST_CASE("pnm header comments are skipped") {
  TempDir tmp("pnm-comment");
  const auto path = tmp.path / "c.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# a comment\n2 1\n# another\n255\n";
    out.put(7);
    out.put(250);
  }
  const Image img = load_pnm(path);
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.at(0, 0) == 7);
  CHECK(img.at(0, 1) == 250);
}

TEST_CASE("wav round trip is exact for 16-bit content") {
  TempDir tmp("wav");
  Waveform wav;
  wav.rate_hz = 16000;
  for (int i = 0; i < 1000; ++i) {
    wav.samples.push_back(std::round(32767.0 * std::sin(0.01 * i)) / 32767.0);
  }
  const auto path = tmp.path / "t.wav";
  save_wav(wav, path);
  const Waveform back = load_wav(path);
  REQUIRE(back.samples.size() == wav.samples.size());
  CHECK(back.rate_hz == 16000);
  for (std::size_t i = 0; i < wav.samples.size(); ++i) {
    CHECK(back.samples[i] == doctest::Approx(wav.samples[i]).epsilon(1e-4));
  }
}

TEST_CASE("mel scale conversions") {
  CHECK(hz_to_mel(0.0) == doctest::Approx(0.0));
  CHECK(hz_to_mel(700.0) == doctest::Approx(781.1728387480312).epsilon(1e-12));
  CHECK(hz_to_mel(1000.0) == doctest::Approx(999.9855371396244).epsilon(1e-12));
  for (const double hz : {10.0, 440.0, 2000.0, 7999.0}) {
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-9));
  }
}

TEST_CASE("mel filterbank rows are nonnegative and localized") {
  const Matrix fb = mel_filterbank(80, 512, 16000);
  CHECK(fb.rows() == 80);
  CHECK(fb.cols() == 257);
  CHECK(fb.minCoeff() >= 0.0);
  for (Eigen::Index m = 0; m < fb.rows(); ++m) CHECK(fb.row(m).sum() > 0.0);
}

TEST_CASE("spectrogram of a 440 Hz tone peaks in the right mel band") {
  Waveform wav;
  wav.rate_hz = 16000;
  for (int i = 0; i < 16000; ++i) {
    wav.samples.push_back(
        0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * i / 16000.0));
  }
  const Matrix mel = compute_mel_spectrogram(wav);
  // 1 s at 25 ms window / 10 ms hop.
  CHECK(mel.rows() == 1 + (16000 - 400) / 160);
  CHECK(mel.cols() == 80);

  Eigen::Index peak;
  mel.colwise().mean().maxCoeff(&peak);
  // The filter whose center is nearest 440 Hz.
  const double mel_max = hz_to_mel(8000.0);
  Eigen::Index expected = 0;
  double best = 1e300;
  for (Eigen::Index m = 0; m < 80; ++m) {
    const double center = mel_to_hz(mel_max * (m + 1) / 81.0);
    if (std::abs(center - 440.0) < best) {
      best = std::abs(center - 440.0);
      expected = m;
    }
  }
  CHECK(std::abs(peak - expected) <= 1);
}

TEST_CASE("short and empty audio edge cases") {
  Waveform wav;
  wav.rate_hz = 16000;
  CHECK_THROWS_AS(compute_mel_spectrogram(wav), EmptyAudio);
  wav.samples.assign(100, 0.1);  // shorter than one window
  CHECK(compute_mel_spectrogram(wav).rows() == 1);
}
