#include "avfd/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "avfd/rng.hpp"

namespace avfd {

namespace {

// ---------------------------------------------------------------------------
// Checkpoint serialization (little-endian doubles, length-prefixed strings).

constexpr char kMagic[8] = {'A', 'V', 'F', 'D', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_double(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

double get_double(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_double(out, m(r, c));
  }
}

Matrix get_matrix(std::istream& in) {
  const auto rows = static_cast<Eigen::Index>(get_u64(in));
  const auto cols = static_cast<Eigen::Index>(get_u64(in));
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = get_double(in);
  }
  return m;
}

void put_vector(std::ostream& out, const Vector& v) {
  put_u64(out, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put_double(out, v(i));
}

Vector get_vector(std::istream& in) {
  const auto n = static_cast<Eigen::Index>(get_u64(in));
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = get_double(in);
  return v;
}

// ---------------------------------------------------------------------------
// Adam over a flat list of parameter blocks.

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;

  explicit AdamState(const std::vector<Matrix*>& params) {
    for (const Matrix* p : params) {
      m.push_back(Matrix::Zero(p->rows(), p->cols()));
      v.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }

  void update(std::vector<Matrix*>& params,
              const std::vector<Matrix>& grads, double lr) {
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, step);
    const double bc2 = 1.0 - std::pow(beta2, step);
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
      v[i] = beta2 * v[i] +
             (1.0 - beta2) * grads[i].cwiseProduct(grads[i]);
      const Matrix m_hat = m[i] / bc1;
      const Matrix v_hat = v[i] / bc2;
      *params[i] -= lr * m_hat.cwiseQuotient(
          v_hat.cwiseSqrt() + Matrix::Constant(v_hat.rows(), v_hat.cols(), eps));
    }
  }
};

std::vector<Matrix*> parameter_blocks(ModelState& state) {
  std::vector<Matrix*> params;
  for (auto& t : state.prompts.learnable_pos) params.push_back(&t);
  for (auto& t : state.prompts.learnable_neg) params.push_back(&t);
  params.push_back(&state.W);
  params.push_back(&state.proj.visual);
  params.push_back(&state.proj.audio);
  params.push_back(&state.gen.w1);
  params.push_back(&state.gen.w2);
  return params;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out.write(kMagic, 8);
  put_u64(out, kVersion);

  const ModelHyper& h = ckpt.state.hyper;
  put_u64(out, static_cast<std::uint64_t>(h.d));
  put_u64(out, static_cast<std::uint64_t>(h.d_raw));
  put_u64(out, static_cast<std::uint64_t>(h.d_tok));
  put_u64(out, static_cast<std::uint64_t>(h.tokens_per_prompt));
  put_u64(out, static_cast<std::uint64_t>(h.hidden));
  put_double(out, h.tau);
  put_double(out, h.tau_av);
  put_u64(out, static_cast<std::uint64_t>(h.window));
  put_vector(out, h.alpha);
  put_u64(out, h.seed);

  const PromptHierarchy& pr = ckpt.state.prompts;
  put_u64(out, pr.positives.size());
  for (const auto& s : pr.positives) put_string(out, s);
  put_u64(out, pr.negatives.size());
  for (const auto& s : pr.negatives) put_string(out, s);
  put_u64(out, pr.learnable_pos.size());
  for (const auto& m : pr.learnable_pos) put_matrix(out, m);
  put_u64(out, pr.learnable_neg.size());
  for (const auto& m : pr.learnable_neg) put_matrix(out, m);

  put_matrix(out, ckpt.state.W);
  put_matrix(out, ckpt.state.proj.visual);
  put_matrix(out, ckpt.state.proj.audio);
  put_matrix(out, ckpt.state.gen.w1);
  put_vector(out, ckpt.state.gen.b1);
  put_matrix(out, ckpt.state.gen.w2);
  put_vector(out, ckpt.state.gen.b2);

  put_u64(out, static_cast<std::uint64_t>(ckpt.epoch));
  put_u64(out, ckpt.seed);
  put_u64(out, ckpt.loss_history.size());
  for (const double l : ckpt.loss_history) put_double(out, l);
  if (!out) throw IoError("write failure: " + path.string());

  // Human-readable sidecar.
  std::ofstream meta(path.string() + ".meta");
  meta << "format=avfd-checkpoint v" << kVersion << "\n"
       << "d=" << h.d << "\nd_raw=" << h.d_raw << "\nd_tok=" << h.d_tok
       << "\ntokens_per_prompt=" << h.tokens_per_prompt
       << "\nhidden=" << h.hidden << "\ntau=" << h.tau
       << "\ntau_av=" << h.tau_av << "\nwindow=" << h.window << "\nalpha="
       << h.alpha(0) << "," << h.alpha(1) << "," << h.alpha(2)
       << "\nseed=" << h.seed << "\nepoch=" << ckpt.epoch
       << "\nsteps=" << ckpt.loss_history.size() << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) {
    throw ParseError("not an avfd checkpoint: " + path.string());
  }
  if (get_u64(in) != kVersion) {
    throw ParseError("unsupported checkpoint version in " + path.string());
  }

  Checkpoint ckpt;
  ModelHyper& h = ckpt.state.hyper;
  h.d = static_cast<int>(get_u64(in));
  h.d_raw = static_cast<int>(get_u64(in));
  h.d_tok = static_cast<int>(get_u64(in));
  h.tokens_per_prompt = static_cast<int>(get_u64(in));
  h.hidden = static_cast<int>(get_u64(in));
  h.tau = get_double(in);
  h.tau_av = get_double(in);
  h.window = static_cast<int>(get_u64(in));
  h.alpha = get_vector(in);
  h.seed = get_u64(in);

  PromptHierarchy& pr = ckpt.state.prompts;
  pr.positives.resize(get_u64(in));
  for (auto& s : pr.positives) s = get_string(in);
  pr.negatives.resize(get_u64(in));
  for (auto& s : pr.negatives) s = get_string(in);
  pr.learnable_pos.resize(get_u64(in));
  for (auto& m : pr.learnable_pos) m = get_matrix(in);
  pr.learnable_neg.resize(get_u64(in));
  for (auto& m : pr.learnable_neg) m = get_matrix(in);

  ckpt.state.W = get_matrix(in);
  ckpt.state.proj.visual = get_matrix(in);
  ckpt.state.proj.audio = get_matrix(in);
  ckpt.state.gen.w1 = get_matrix(in);
  ckpt.state.gen.b1 = get_vector(in);
  ckpt.state.gen.w2 = get_matrix(in);
  ckpt.state.gen.b2 = get_vector(in);

  ckpt.epoch = static_cast<int>(get_u64(in));
  ckpt.seed = get_u64(in);
  ckpt.loss_history.resize(get_u64(in));
  for (auto& l : ckpt.loss_history) l = get_double(in);
  if (!in) throw ParseError("truncated checkpoint: " + path.string());
  return ckpt;
}

RawFeatures extract_raw_features(const SampleRecord& sample,
                                 const std::filesystem::path& base_dir,
                                 const ToyEncoderSet& encoders,
                                 const MelParams& mel_params) {
  // Same pipeline as extract_features but stopping before the projections.
  const Projections identity = Projections::identity(encoders.av.raw_dim());
  const FeatureBundle bundle = extract_features(
      sample, base_dir, encoders.face, encoders.av, identity, mel_params);
  return {bundle.face, bundle.visual, bundle.audio};
}

LossBreakdown total_loss(const std::vector<RawFeatures>& batch,
                         const ModelState& state, const TextEncoder& text_enc,
                         double coeff_av, double coeff_ft) {
  if (batch.empty()) throw EmptyBatch("empty training batch");
  const PolarityEmbeddings emb = encode_polarity(
      state.prompts, text_enc, state.W, state.hyper.tau);

  std::vector<Vector> faces;
  faces.reserve(batch.size());
  double l_av = 0.0;
  for (const auto& clip : batch) {
    faces.push_back(clip.face);
    const AlignmentMatrix am = alignment_matrix(
        clip.v_raw * state.proj.visual.transpose(),
        clip.a_raw * state.proj.audio.transpose(), state.hyper.tau_av,
        state.hyper.window);
    l_av += av_alignment_loss(am);
  }
  l_av /= static_cast<double>(batch.size());
  const double l_ft = ftca_loss(faces, emb);

  LossBreakdown out;
  out.av = l_av;
  out.ft = l_ft;
  out.total = coeff_av * l_av + coeff_ft * l_ft;
  return out;
}

Checkpoint train(const DatasetManifest& manifest,
                 const std::filesystem::path& base_dir,
                 const TrainConfig& cfg, const ToyEncoderSet& encoders) {
  if (cfg.learning_rate <= 0.0) throw InvalidSpec("learning_rate must be > 0");
  if (cfg.batch_size < 1) throw InvalidSpec("batch_size must be >= 1");
  if (!std::isfinite(cfg.loss_coeff_av) || !std::isfinite(cfg.loss_coeff_ft)) {
    throw InvalidSpec("loss coefficients must be finite");
  }

  std::vector<const SampleRecord*> train_records;
  for (const auto& r : manifest.records) {
    if (r.split != Split::kTrain) continue;
    if (r.label != Label::kReal) {
      throw ValidationError("fake sample '" + r.id + "' in train split");
    }
    train_records.push_back(&r);
  }
  if (train_records.empty()) {
    throw ValidationError("manifest has no train records");
  }

  std::vector<RawFeatures> features;
  features.reserve(train_records.size());
  for (const auto* r : train_records) {
    features.push_back(extract_raw_features(*r, base_dir, encoders));
  }

  Checkpoint ckpt;
  ckpt.state = ModelState::init(cfg.hyper, PromptHierarchy::defaults());
  ckpt.seed = cfg.seed;
  ModelState& state = ckpt.state;
  std::vector<Matrix*> params = parameter_blocks(state);
  AdamState adam(params);

  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(mix_seed(cfg.seed, fnv1a("shuffle")));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(
          order.size(), start + static_cast<std::size_t>(cfg.batch_size));

      std::vector<Matrix> grads;
      grads.reserve(params.size());
      for (const Matrix* p : params) {
        grads.push_back(Matrix::Zero(p->rows(), p->cols()));
      }
      // Grad slots follow parameter_blocks() order.
      const std::size_t n_pos = state.prompts.learnable_pos.size();
      const std::size_t n_neg = state.prompts.learnable_neg.size();
      Matrix& g_w = grads[n_pos + n_neg];
      Matrix& g_pv = grads[n_pos + n_neg + 1];
      Matrix& g_pa = grads[n_pos + n_neg + 2];

      // Face-text contrastive path.
      PolarityCache cache;
      const PolarityEmbeddings emb = encode_polarity(
          state.prompts, encoders.text, state.W, state.hyper.tau, &cache);
      std::vector<Vector> faces;
      faces.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) {
        faces.push_back(features[order[i]].face);
      }
      const double l_ft = ftca_loss(faces, emb);
      Vector dp, dn;
      ftca_loss_backward(faces, emb, &dp, &dn);
      dp *= cfg.loss_coeff_ft;
      dn *= cfg.loss_coeff_ft;
      const PolarityGrads pg = encode_polarity_backward(
          state.prompts, encoders.text, state.W, cache, dp, dn);
      g_w += pg.dW;
      for (std::size_t i = 0; i < n_pos; ++i) grads[i] += pg.d_learnable_pos[i];
      for (std::size_t i = 0; i < n_neg; ++i) {
        grads[n_pos + i] += pg.d_learnable_neg[i];
      }

      // Audio-visual alignment path.
      double l_av = 0.0;
      const double clip_scale =
          cfg.loss_coeff_av / static_cast<double>(end - start);
      for (std::size_t i = start; i < end; ++i) {
        const RawFeatures& clip = features[order[i]];
        const Matrix v = clip.v_raw * state.proj.visual.transpose();
        const Matrix a = clip.a_raw * state.proj.audio.transpose();
        l_av += av_alignment_loss(alignment_matrix(
            v, a, state.hyper.tau_av, state.hyper.window));
        Matrix dv, da;
        av_alignment_loss_backward(v, a, state.hyper.tau_av,
                                   state.hyper.window, &dv, &da);
        g_pv += clip_scale * dv.transpose() * clip.v_raw;
        g_pa += clip_scale * da.transpose() * clip.a_raw;
      }
      l_av /= static_cast<double>(end - start);

      const double total =
          cfg.loss_coeff_av * l_av + cfg.loss_coeff_ft * l_ft;
      if (!std::isfinite(total)) {
        std::ostringstream msg;
        msg << "non-finite loss at epoch " << epoch << " step "
            << ckpt.loss_history.size() << " (L_av=" << l_av
            << ", L_ft=" << l_ft << ")";
        throw NonFinite(msg.str());
      }
      ckpt.loss_history.push_back(total);
      adam.update(params, grads, cfg.learning_rate);
    }
    ckpt.epoch = epoch + 1;
  }
  return ckpt;
}

}  // namespace avfd
