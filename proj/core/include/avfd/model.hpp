#pragma once

#include <cstdint>
#include <memory>

#include "avfd/encoders.hpp"
#include "avfd/fapl.hpp"
#include "avfd/mmdwl.hpp"

namespace avfd {

/// Hyperparameters shared by training and inference.
struct ModelHyper {
  int d = 512;       // shared aligned embedding width
  int d_raw = 64;    // front-end output width
  int d_tok = 64;    // text token embedding width
  int tokens_per_prompt = 4;
  int hidden = 256;  // weight generator hidden width
  double tau = 0.07;
  double tau_av = 0.1;
  int window = 15;
  Vector alpha = (Vector(3) << -0.1, 0.1, 0.1).finished();
  std::uint64_t seed = 0;

  bool operator==(const ModelHyper&) const = default;
};

/// All trainable state: learnable prompt tokens, shared projection W,
/// modality projections, and the weight-generator MLP.
struct ModelState {
  ModelHyper hyper;
  PromptHierarchy prompts;
  Matrix W;  // d x d shared text projection
  Projections proj;
  WeightGenerator gen;

  static ModelState init(const ModelHyper& hyper,
                         const PromptHierarchy& prompt_texts);
};

/// The deterministic toy backbones, constructed from one config seed.
struct ToyEncoderSet {
  ToyEncoderSet(std::uint64_t seed, const ModelHyper& hyper)
      : face(seed, hyper.d), text(seed, hyper.d, hyper.d_tok),
        av(seed, hyper.d_raw) {}

  ToyFaceEncoder face;
  ToyTextEncoder text;
  ToyAVFrontEnd av;
};

}  // namespace avfd
