#include "avfd/fapl.hpp"

#include <cmath>
#include <fstream>

#include "avfd/rng.hpp"

namespace avfd {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

Vector normalized_or_throw(const Vector& v, const char* what) {
  const double norm = v.norm();
  if (!std::isfinite(norm) || norm <= 1e-12) {
    throw NonFinite(std::string("degenerate vector: ") + what);
  }
  return v / norm;
}

void check_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NonFinite(std::string("non-finite ") + what);
}

}  // namespace

PromptHierarchy PromptHierarchy::defaults() {
  PromptHierarchy ph;
  ph.positives = {"a real human face", "a bonafide face with expressive eyes",
                  "a genuine face with natural mouth"};
  ph.negatives = {"a fake human face", "a spoof face with dull eyes",
                  "a forged face with unnatural mouth"};
  return ph;
}

void PromptHierarchy::init_learnable(int tokens_per_prompt, int token_dim,
                                     std::uint64_t seed, double noise_std) {
  learnable_pos.clear();
  learnable_neg.clear();
  std::uint64_t stream = 0;
  for (std::size_t i = 0; i < positives.size(); ++i) {
    learnable_pos.push_back(gaussian_matrix(mix_seed(seed, stream++),
                                            tokens_per_prompt, token_dim,
                                            noise_std));
  }
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    learnable_neg.push_back(gaussian_matrix(mix_seed(seed, stream++),
                                            tokens_per_prompt, token_dim,
                                            noise_std));
  }
}

PromptHierarchy load_prompts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prompt file: " + path.string());
  PromptHierarchy ph;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": expected `pos<TAB>text` or `neg<TAB>text`");
    }
    const std::string kind = line.substr(0, tab);
    const std::string text = line.substr(tab + 1);
    if (kind == "pos") {
      ph.positives.push_back(text);
    } else if (kind == "neg") {
      ph.negatives.push_back(text);
    } else {
      throw ParseError(path.string() + ":" + std::to_string(lineno) +
                       ": unknown polarity '" + kind + "'");
    }
  }
  return ph;
}

void save_prompts(const PromptHierarchy& prompts,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write prompt file: " + path.string());
  for (const auto& p : prompts.positives) out << "pos\t" << p << "\n";
  for (const auto& n : prompts.negatives) out << "neg\t" << n << "\n";
}

PolarityEmbeddings encode_polarity(const PromptHierarchy& prompts,
                                   const TextEncoder& text_enc,
                                   const Matrix& W, double tau,
                                   PolarityCache* cache) {
  if (prompts.positives.empty() || prompts.negatives.empty()) {
    throw EmptyPolarity("need at least one prompt per polarity");
  }
  if (tau <= 0.0) throw InvalidSpec("tau must be positive");
  if (W.rows() != text_enc.dim() || W.cols() != text_enc.dim()) {
    throw DimensionMismatch("W must be d x d for the text encoder dimension");
  }

  const Matrix empty(0, text_enc.token_dim());
  const auto encode_polarity_mean =
      [&](const std::vector<std::string>& texts,
          const std::vector<Matrix>& learnable,
          std::vector<Vector>* raw_out) {
        Vector h = Vector::Zero(text_enc.dim());
        for (std::size_t i = 0; i < texts.size(); ++i) {
          const Matrix& tok =
              i < learnable.size() ? learnable[i] : empty;
          Vector raw = text_enc.encode(text_enc.tokenize(texts[i]), tok);
          if (raw_out) raw_out->push_back(raw);
          h += normalized_or_throw(raw, "prompt embedding");
        }
        return Vector(h / static_cast<double>(texts.size()));
      };

  PolarityEmbeddings emb;
  emb.tau = tau;
  std::vector<Vector> pos_raw, neg_raw;
  const Vector h_pos =
      encode_polarity_mean(prompts.positives, prompts.learnable_pos, &pos_raw);
  const Vector h_neg =
      encode_polarity_mean(prompts.negatives, prompts.learnable_neg, &neg_raw);
  emb.p = W * h_pos;
  emb.n = W * h_neg;
  if (cache) {
    cache->pos_raw = std::move(pos_raw);
    cache->neg_raw = std::move(neg_raw);
    cache->h_pos = h_pos;
    cache->h_neg = h_neg;
  }
  return emb;
}

PolarityGrads encode_polarity_backward(const PromptHierarchy& prompts,
                                       const TextEncoder& text_enc,
                                       const Matrix& W,
                                       const PolarityCache& cache,
                                       const Vector& dp, const Vector& dn) {
  PolarityGrads grads;
  grads.dW = dp * cache.h_pos.transpose() + dn * cache.h_neg.transpose();

  const auto backprop_side = [&](const std::vector<std::string>& texts,
                                 const std::vector<Matrix>& learnable,
                                 const std::vector<Vector>& raw,
                                 const Vector& d_out,
                                 std::vector<Matrix>* d_learnable) {
    const Vector dh = W.transpose() * d_out / static_cast<double>(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const Vector& t = raw[i];
      const double norm = t.norm();
      const Vector t_hat = t / norm;
      // d(t/||t||)/dt applied to dh.
      const Vector dt = (dh - t_hat * t_hat.dot(dh)) / norm;
      if (i < learnable.size() && learnable[i].rows() > 0) {
        d_learnable->push_back(text_enc.grad_learnable(
            text_enc.tokenize(texts[i]), learnable[i], dt));
      } else {
        d_learnable->push_back(Matrix(0, text_enc.token_dim()));
      }
    }
  };

  backprop_side(prompts.positives, prompts.learnable_pos, cache.pos_raw, dp,
                &grads.d_learnable_pos);
  backprop_side(prompts.negatives, prompts.learnable_neg, cache.neg_raw, dn,
                &grads.d_learnable_neg);
  return grads;
}

double ftca_loss(const std::vector<Vector>& faces,
                 const PolarityEmbeddings& emb) {
  if (faces.empty()) throw EmptyBatch("empty face batch");
  check_finite(emb.p, "polarity embedding p");
  check_finite(emb.n, "polarity embedding n");
  const Vector p_hat = normalized_or_throw(emb.p, "p");
  const Vector n_hat = normalized_or_throw(emb.n, "n");
  double loss = 0.0;
  for (const auto& f : faces) {
    check_finite(f, "face vector");
    const double s_pos = f.dot(p_hat) / emb.tau;
    const double s_neg = f.dot(n_hat) / emb.tau;
    loss += softplus(s_neg - s_pos);  // == -log sigma(s_pos - s_neg)
  }
  return loss / static_cast<double>(faces.size());
}

void ftca_loss_backward(const std::vector<Vector>& faces,
                        const PolarityEmbeddings& emb, Vector* dp,
                        Vector* dn) {
  if (faces.empty()) throw EmptyBatch("empty face batch");
  const double p_norm = emb.p.norm();
  const double n_norm = emb.n.norm();
  const Vector p_hat = emb.p / p_norm;
  const Vector n_hat = emb.n / n_norm;
  const double inv_n = 1.0 / static_cast<double>(faces.size());

  Vector dp_hat = Vector::Zero(emb.p.size());
  Vector dn_hat = Vector::Zero(emb.n.size());
  for (const auto& f : faces) {
    const double s_pos = f.dot(p_hat) / emb.tau;
    const double s_neg = f.dot(n_hat) / emb.tau;
    const double sig = sigmoid(s_neg - s_pos);
    dp_hat -= sig * inv_n / emb.tau * f;
    dn_hat += sig * inv_n / emb.tau * f;
  }
  *dp = (dp_hat - p_hat * p_hat.dot(dp_hat)) / p_norm;
  *dn = (dn_hat - n_hat * n_hat.dot(dn_hat)) / n_norm;
}

double facial_anomaly(const Vector& f, const PolarityEmbeddings& emb) {
  check_finite(f, "face vector");
  check_finite(emb.p, "p");
  check_finite(emb.n, "n");
  const Vector p_hat = normalized_or_throw(emb.p, "p");
  const Vector n_hat = normalized_or_throw(emb.n, "n");
  return f.dot(n_hat) - f.dot(p_hat);
}

Vector build_pattern(const Vector& f, const PolarityEmbeddings& emb) {
  if (f.size() != emb.p.size()) {
    throw DimensionMismatch("face and polarity embedding dims differ");
  }
  Vector fp(2 * f.size());
  fp << emb.p, f;
  return fp;
}

std::map<std::string, SimilarityStats> similarity_diagnostic(
    const std::map<std::string, std::vector<Vector>>& groups,
    const PolarityEmbeddings& emb) {
  const Vector p_hat = normalized_or_throw(emb.p, "p");
  const Vector n_hat = normalized_or_throw(emb.n, "n");
  std::map<std::string, SimilarityStats> out;
  for (const auto& [name, faces] : groups) {
    if (faces.empty()) throw EmptyGroup("empty group: " + name);
    SimilarityStats stats;
    for (const auto& f : faces) {
      stats.pos_mean += f.dot(p_hat);
      stats.neg_mean += f.dot(n_hat);
    }
    stats.pos_mean /= static_cast<double>(faces.size());
    stats.neg_mean /= static_cast<double>(faces.size());
    stats.difference = stats.pos_mean - stats.neg_mean;
    out[name] = stats;
  }
  return out;
}

}  // namespace avfd
