#include "avfd/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "avfd/audio.hpp"
#include "avfd/fapl.hpp"
#include "avfd/mel.hpp"
#include "avfd/rng.hpp"

namespace avfd {

namespace {

constexpr double kToneBase = 0.04;  // per-band sinusoid base amplitude
constexpr double kToneGain = 2.0;   // log-energy swing per unit latent
constexpr double kMouthGain = 0.8;  // latent-to-block-contrast gain
constexpr double kFacePixelNoise = 3.0;

Image add_pixel_noise(const Image& img, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  Image out = img;
  for (auto& p : out.data) {
    p = static_cast<std::uint8_t>(
        std::clamp<long>(std::lround(p + dist(rng)), 0, 255));
  }
  return out;
}

// One mouth crop whose 4x2 block summary reproduces the latent row.
Image mouth_from_latent(const Vector& z, int size) {
  Image out(size, size, 1);
  for (int y = 0; y < size; ++y) {
    const int gy = std::min(ToyAVFrontEnd::kGridY - 1,
                            y * ToyAVFrontEnd::kGridY / size);
    for (int x = 0; x < size; ++x) {
      const int gx = std::min(ToyAVFrontEnd::kGridX - 1,
                              x * ToyAVFrontEnd::kGridX / size);
      const double v =
          127.5 * (1.0 + kMouthGain * z(gy * ToyAVFrontEnd::kGridX + gx));
      out.at(y, x, 0) =
          static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
    }
  }
  return out;
}

// Eight tones, one per mel band-summary slot, with per-video-frame
// log-amplitudes proportional to the latent; the log-mel band means are
// then linear in the latent up to a per-band constant (removed by the
// front-end's temporal centering).
Waveform audio_from_latents(const std::vector<Vector>& z, int rate_hz,
                            double fps) {
  const double mel_max = hz_to_mel(rate_hz / 2.0);
  std::vector<double> freqs(ToyAVFrontEnd::kSummaryDim);
  for (int b = 0; b < ToyAVFrontEnd::kSummaryDim; ++b) {
    freqs[b] = mel_to_hz(mel_max * (2.0 * b + 1.0) /
                         (2.0 * ToyAVFrontEnd::kSummaryDim));
  }
  const auto frames = static_cast<int>(z.size());
  const auto n = static_cast<std::size_t>(
      std::lround(frames * rate_hz / fps));
  Waveform wav;
  wav.rate_hz = rate_hz;
  wav.samples.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const int t = std::min<int>(frames - 1,
                                static_cast<int>(s * fps / rate_hz));
    double acc = 0.0;
    for (int b = 0; b < ToyAVFrontEnd::kSummaryDim; ++b) {
      const double amp = kToneBase * std::exp(0.5 * kToneGain * z[t](b));
      acc += amp * std::sin(2.0 * std::numbers::pi * freqs[b] * s / rate_hz);
    }
    wav.samples[s] = std::clamp(acc, -1.0, 1.0);
  }
  return wav;
}

// Polarity directions of the untrained toy text encoder (zero learnable
// tokens, identity projection): the planting targets for face frames.
std::pair<Vector, Vector> prompt_directions(const ToyEncoderSet& enc,
                                            const ModelHyper& hyper) {
  PromptHierarchy prompts = PromptHierarchy::defaults();
  prompts.init_learnable(0, hyper.d_tok, hyper.seed, 0.0);
  const PolarityEmbeddings emb = encode_polarity(
      prompts, enc.text, Matrix::Identity(hyper.d, hyper.d), hyper.tau);
  return {emb.p.normalized(), emb.n.normalized()};
}

}  // namespace

DatasetManifest synthesize_dataset(const SynthConfig& cfg,
                                   const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  if (cfg.n < 0) throw ConfigError("synth clip count must be >= 0");
  if (cfg.n > 0 && cfg.frames < 1) {
    throw ConfigError("synth clips need at least one frame");
  }
  fs::create_directories(out_dir);

  DatasetManifest manifest;
  manifest.name = "synthetic-toy";
  manifest.version = "1";

  if (cfg.n > 0) {
    const ToyEncoderSet enc(cfg.hyper.seed, cfg.hyper);
    const auto [pos_dir, neg_dir] = prompt_directions(enc, cfg.hyper);
    const Image real_face = enc.face.prototype_frame(pos_dir, cfg.face_size);
    const Image fake_face = enc.face.prototype_frame(neg_dir, cfg.face_size);
    const int n_real = cfg.n / 2;

    for (int i = 0; i < cfg.n; ++i) {
      const bool real = i < n_real;
      std::ostringstream id;
      id << "synth-" << (real ? "real" : "fake") << "-";
      id.width(4);
      id.fill('0');
      id << i;

      SampleRecord rec;
      rec.id = id.str();
      rec.label = real ? Label::kReal : Label::kFake;
      rec.scenario = i % 2 == 0 ? Scenario::kTalking : Scenario::kSinging;
      rec.split = (real && !cfg.all_test) ? Split::kTrain : Split::kTest;
      rec.sample_rate_hz = cfg.sample_rate_hz;
      rec.fps = cfg.fps;

      const fs::path clip_dir = out_dir / rec.id;
      fs::create_directories(clip_dir);

      std::mt19937_64 rng(mix_seed(cfg.seed, fnv1a(rec.id)));
      std::uniform_real_distribution<double> uni(-1.0, 1.0);
      std::vector<Vector> z(static_cast<std::size_t>(cfg.frames));
      for (auto& row : z) {
        row.resize(ToyAVFrontEnd::kSummaryDim);
        for (Eigen::Index j = 0; j < row.size(); ++j) row(j) = uni(rng);
      }

      const Image& face = real ? real_face : fake_face;
      for (int t = 0; t < cfg.frames; ++t) {
        std::ostringstream tag;
        tag.width(3);
        tag.fill('0');
        tag << t;

        const auto frame_rel = fs::path(rec.id) / ("frame_" + tag.str() + ".pgm");
        save_pnm(add_pixel_noise(face, kFacePixelNoise,
                                 mix_seed(cfg.seed, fnv1a(rec.id + "/f" + tag.str()))),
                 out_dir / frame_rel);
        rec.frame_refs.push_back(frame_rel.string());

        const auto mouth_rel = fs::path(rec.id) / ("mouth_" + tag.str() + ".pgm");
        save_pnm(mouth_from_latent(z[static_cast<std::size_t>(t)], cfg.mouth_size),
                 out_dir / mouth_rel);
        rec.mouth_refs.push_back(mouth_rel.string());
      }

      // Fakes speak with someone else's timing: a half-period rotation of
      // the latent sequence breaks every in-window audio-visual match.
      std::vector<Vector> z_audio = z;
      if (!real && cfg.frames > 1) {
        const int shift = std::max(1, cfg.frames / 2);
        for (int t = 0; t < cfg.frames; ++t) {
          z_audio[static_cast<std::size_t>(t)] =
              z[static_cast<std::size_t>((t + shift) % cfg.frames)];
        }
      }
      const auto audio_rel = fs::path(rec.id) / "audio.wav";
      save_wav(audio_from_latents(z_audio, cfg.sample_rate_hz, cfg.fps),
               out_dir / audio_rel);
      rec.audio_ref = audio_rel.string();

      manifest.records.push_back(std::move(rec));
    }
  }

  save_manifest(manifest, out_dir / "manifest.avfd");
  return manifest;
}

}  // namespace avfd
