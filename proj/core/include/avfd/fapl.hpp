#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "avfd/encoders.hpp"
#include "avfd/types.hpp"

namespace avfd {

/// Multi-granularity positive/negative prompt texts plus per-prompt
/// learnable token state.
struct PromptHierarchy {
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  std::vector<Matrix> learnable_pos;  // one l x token_dim block per prompt
  std::vector<Matrix> learnable_neg;

  /// The predefined face/eyes/mouth prompt pairs.
  static PromptHierarchy defaults();

  /// Zero-init plus small seeded noise for every learnable token block.
  void init_learnable(int tokens_per_prompt, int token_dim,
                      std::uint64_t seed, double noise_std = 0.02);
};

/// Prompt file: UTF-8 lines `pos<TAB>text` / `neg<TAB>text`.
PromptHierarchy load_prompts(const std::filesystem::path& path);
void save_prompts(const PromptHierarchy& prompts,
                  const std::filesystem::path& path);

/// Projected polarity embeddings. p and n come through one shared W.
struct PolarityEmbeddings {
  Vector p;
  Vector n;
  double tau = 0.07;
};

/// Intermediates cached by encode_polarity for the backward pass.
struct PolarityCache {
  std::vector<Vector> pos_raw;  // per-prompt encoder outputs
  std::vector<Vector> neg_raw;
  Vector h_pos;  // mean of normalized encoder outputs per polarity
  Vector h_neg;
};

/// Each prompt (fixed tokens + its learnable tokens) is encoded, the
/// outputs L2-normalized, averaged within polarity, then projected by the
/// shared W. The result is intentionally not re-normalized.
PolarityEmbeddings encode_polarity(const PromptHierarchy& prompts,
                                   const TextEncoder& text_enc,
                                   const Matrix& W, double tau,
                                   PolarityCache* cache = nullptr);

struct PolarityGrads {
  Matrix dW;
  std::vector<Matrix> d_learnable_pos;
  std::vector<Matrix> d_learnable_neg;
};

/// Backpropagates dL/dp, dL/dn into W and the learnable tokens.
PolarityGrads encode_polarity_backward(const PromptHierarchy& prompts,
                                       const TextEncoder& text_enc,
                                       const Matrix& W,
                                       const PolarityCache& cache,
                                       const Vector& dp, const Vector& dn);

/// Face-text contrastive alignment loss over a batch of unit-norm face
/// vectors: -(1/N) sum log sigma((<f,p_hat> - <f,n_hat>)/tau), evaluated
/// with a stable softplus. p and n are re-normalized before the
/// similarities.
double ftca_loss(const std::vector<Vector>& faces,
                 const PolarityEmbeddings& emb);

/// Gradients of ftca_loss with respect to the unnormalized p and n.
void ftca_loss_backward(const std::vector<Vector>& faces,
                        const PolarityEmbeddings& emb, Vector* dp,
                        Vector* dn);

/// Scalar anomaly read-out: <f, n_hat> - <f, p_hat> in [-2, 2]; larger
/// means more forged-looking.
double facial_anomaly(const Vector& f, const PolarityEmbeddings& emb);

/// Authentic pattern fp = [p ; f], length 2d (unnormalized p).
Vector build_pattern(const Vector& f, const PolarityEmbeddings& emb);

struct SimilarityStats {
  double pos_mean = 0.0;    // mean <f, p_hat>
  double neg_mean = 0.0;    // mean <f, n_hat>
  double difference = 0.0;  // pos_mean - neg_mean
};

/// Per-group mean similarities against the normalized polarity embeddings.
std::map<std::string, SimilarityStats> similarity_diagnostic(
    const std::map<std::string, std::vector<Vector>>& groups,
    const PolarityEmbeddings& emb);

}  // namespace avfd
