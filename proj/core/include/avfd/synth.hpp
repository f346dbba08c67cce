#pragma once

#include <cstdint>
#include <filesystem>

#include "avfd/manifest.hpp"
#include "avfd/model.hpp"

namespace avfd {

/// Desk-scale synthetic dataset: the first half of the clips are real with
/// matching mouth motion and audio (planted cross-modal alignment through
/// the toy front-end) and face frames near the positive-prompt toy
/// embedding; the second half are fake, with time-shuffled audio and face
/// frames near the negative embedding.
struct SynthConfig {
  int n = 200;               // total clips; first half real, second half fake
  std::uint64_t seed = 0;
  int frames = 10;           // video frames per clip
  int face_size = 64;        // square face frames
  int mouth_size = 32;       // square mouth crops
  int sample_rate_hz = 16000;
  double fps = 25.0;
  bool all_test = false;     // true: whole set is a held-out test mix;
                             // false: real -> train, fake -> test
  ModelHyper hyper;          // toy encoder geometry + seed used for planting
};

/// Writes clips under out_dir/<id>/ plus out_dir/manifest.avfd and returns
/// the manifest. Deterministic for a fixed config.
DatasetManifest synthesize_dataset(const SynthConfig& cfg,
                                   const std::filesystem::path& out_dir);

}  // namespace avfd
