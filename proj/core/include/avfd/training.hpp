#pragma once

#include <filesystem>
#include <vector>

#include "avfd/manifest.hpp"
#include "avfd/model.hpp"

namespace avfd {

struct TrainConfig {
  double learning_rate = 9e-4;
  int batch_size = 512;
  int epochs = 30;
  double loss_coeff_av = 1.0;
  double loss_coeff_ft = 1.0;
  std::uint64_t seed = 0;
  ModelHyper hyper;  // tau, tau_av, window, alpha forwarded here
};

struct Checkpoint {
  ModelState state;
  int epoch = 0;
  std::uint64_t seed = 0;
  std::vector<double> loss_history;  // total loss per optimizer step
};

/// Single versioned binary blob plus a readable `.meta` sidecar of
/// hyperparameters.
void save_checkpoint(const Checkpoint& ckpt,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Per-clip frozen front-end outputs; the training loop only updates what
/// sits on top of these.
struct RawFeatures {
  Vector face;   // unit-norm face semantic
  Matrix v_raw;  // T x d_raw
  Matrix a_raw;  // T x d_raw, resampled to T
};

RawFeatures extract_raw_features(const SampleRecord& sample,
                                 const std::filesystem::path& base_dir,
                                 const ToyEncoderSet& encoders,
                                 const MelParams& mel_params = {});

struct LossBreakdown {
  double total = 0.0;
  double av = 0.0;
  double ft = 0.0;
};

/// L = coeff_av * L_av + coeff_ft * L_ft over one batch of clips.
LossBreakdown total_loss(const std::vector<RawFeatures>& batch,
                         const ModelState& state, const TextEncoder& text_enc,
                         double coeff_av, double coeff_ft);

/// Adam over learnable tokens, W, projections, and the weight-generator
/// parameters. Throws ValidationError if the train split contains a fake
/// sample and NonFinite if the loss diverges.
Checkpoint train(const DatasetManifest& manifest,
                 const std::filesystem::path& base_dir,
                 const TrainConfig& cfg, const ToyEncoderSet& encoders);

}  // namespace avfd
