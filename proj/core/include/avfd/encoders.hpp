#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "avfd/image.hpp"
#include "avfd/mel.hpp"
#include "avfd/types.hpp"

namespace avfd {

/// Region-aware face backbone contract: (frame, optional mask) -> d-vector.
/// Implementations must be deterministic for fixed input.
class FaceEncoder {
 public:
  virtual ~FaceEncoder() = default;
  virtual Vector encode(const Image& frame, const Image* mask) const = 0;
  virtual int dim() const = 0;
  virtual std::string name() const = 0;
};

/// Text backbone contract: (fixed tokens + learnable token vectors) ->
/// d-vector, with gradient flow into the learnable token inputs.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  /// learnable is l x token_dim (may have zero rows).
  virtual Vector encode(const std::vector<std::string>& tokens,
                        const Matrix& learnable) const = 0;
  /// Gradient of a scalar loss with respect to the learnable token rows,
  /// given the gradient with respect to the output embedding.
  virtual Matrix grad_learnable(const std::vector<std::string>& tokens,
                                const Matrix& learnable,
                                const Vector& grad_out) const = 0;
  virtual int dim() const = 0;
  virtual int token_dim() const = 0;
  std::vector<std::string> tokenize(const std::string& text) const;
};

/// Visual/auditory front-end pair of the lip-reading backbone.
class AVFrontEnd {
 public:
  virtual ~AVFrontEnd() = default;
  virtual Matrix encode_visual(const std::vector<Image>& mouth_crops) const = 0;
  virtual Matrix encode_audio(const Matrix& mel) const = 0;
  virtual int raw_dim() const = 0;
};

// ---------------------------------------------------------------------------
// Deterministic toy implementations. Seeded pure functions; cheap enough for
// desk-scale datasets and the acceptance experiments.
// ---------------------------------------------------------------------------

class ToyFaceEncoder : public FaceEncoder {
 public:
  ToyFaceEncoder(std::uint64_t seed, int dim, int grid = 32);
  Vector encode(const Image& frame, const Image* mask) const override;
  int dim() const override { return static_cast<int>(map_.rows()); }
  std::string name() const override { return "toy-face"; }

  /// Grayscale frame whose encoding points along `target` (synthetic data
  /// planting). `size` must be a multiple of the grid.
  Image prototype_frame(const Vector& target, int size) const;

 private:
  Matrix map_;  // dim x grid*grid, fixed seeded linear map
  int grid_;
};

class ToyTextEncoder : public TextEncoder {
 public:
  ToyTextEncoder(std::uint64_t seed, int dim, int token_dim = 64);
  Vector encode(const std::vector<std::string>& tokens,
                const Matrix& learnable) const override;
  Matrix grad_learnable(const std::vector<std::string>& tokens,
                        const Matrix& learnable,
                        const Vector& grad_out) const override;
  int dim() const override { return static_cast<int>(map_.rows()); }
  int token_dim() const override { return static_cast<int>(map_.cols()); }

 private:
  Vector token_embedding(const std::string& token) const;

  Matrix map_;  // dim x token_dim
  std::uint64_t seed_;
};

/// Both front-ends share one seeded projection of a low-dim content summary
/// (mouth-crop block means / mel band energies), temporally centered. This
/// gives synthetic datasets a controllable cross-modal alignment structure.
class ToyAVFrontEnd : public AVFrontEnd {
 public:
  static constexpr int kSummaryDim = 8;
  static constexpr int kGridX = 4;
  static constexpr int kGridY = 2;

  ToyAVFrontEnd(std::uint64_t seed, int raw_dim);
  Matrix encode_visual(const std::vector<Image>& mouth_crops) const override;
  Matrix encode_audio(const Matrix& mel) const override;
  int raw_dim() const override { return static_cast<int>(map_.rows()); }

  /// Block means of one mouth crop in [-1, 1], in the fixed 4x2 grid order.
  static Vector block_summary(const Image& img);

 private:
  Matrix map_;  // raw_dim x kSummaryDim
};

/// Linear d_raw -> d maps aligning both streams into the shared space.
struct Projections {
  Matrix visual;  // d x d_raw
  Matrix audio;   // d x d_raw

  static Projections identity(int d);
  /// Shared seeded init: both maps start equal, preserving any cross-modal
  /// alignment present in the raw features.
  static Projections seeded(std::uint64_t seed, int d, int d_raw);
};

/// Mean of per-frame embeddings over T, then L2-normalized.
Vector encode_face_sequence(const FaceEncoder& encoder,
                            const std::vector<Image>& frames,
                            const Image* mask = nullptr);

/// Mean-pools rows of `m` into `target_rows` buckets (audio-to-video frame
/// alignment). Bucket of row r is floor(r * target / rows).
Matrix resample_rows(const Matrix& m, Eigen::Index target_rows);

/// Full per-clip extraction: face semantic, projected visual/audio rows
/// resampled to the clip's T. Paths in `sample` resolve against `base_dir`.
FeatureBundle extract_features(const SampleRecord& sample,
                               const std::filesystem::path& base_dir,
                               const FaceEncoder& face_enc,
                               const AVFrontEnd& frontend,
                               const Projections& projections,
                               const MelParams& mel_params = {});

}  // namespace avfd
