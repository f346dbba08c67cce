#include "avfd/encoders.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "avfd/audio.hpp"
#include "avfd/rng.hpp"

namespace avfd {

namespace {

double pixel_gray(const Image& img, int y, int x) {
  double acc = 0.0;
  for (int c = 0; c < img.channels; ++c) acc += img.at(y, x, c);
  return acc / img.channels;
}

// Block-mean downsample to grid x grid, values mapped to [-1, 1].
// When a mask is given each cell is weighted by its mean mask coverage.
Vector downsample_gray(const Image& img, const Image* mask, int grid) {
  Vector out(static_cast<Eigen::Index>(grid) * grid);
  for (int gy = 0; gy < grid; ++gy) {
    const int y0 = gy * img.height / grid;
    const int y1 = std::max(y0 + 1, (gy + 1) * img.height / grid);
    for (int gx = 0; gx < grid; ++gx) {
      const int x0 = gx * img.width / grid;
      const int x1 = std::max(x0 + 1, (gx + 1) * img.width / grid);
      double sum = 0.0, wsum = 0.0;
      for (int y = y0; y < y1 && y < img.height; ++y) {
        for (int x = x0; x < x1 && x < img.width; ++x) {
          sum += pixel_gray(img, y, x);
          if (mask) wsum += pixel_gray(*mask, y, x) / 255.0;
        }
      }
      const double count = static_cast<double>((y1 - y0) * (x1 - x0));
      double v = (sum / count - 127.5) / 127.5;
      if (mask) v *= wsum / count;
      out(static_cast<Eigen::Index>(gy) * grid + gx) = v;
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> TextEncoder::tokenize(const std::string& text) const {
  std::vector<std::string> tokens;
  std::string cur;
  for (const char ch : text) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) tokens.push_back(std::move(cur)), cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

// ---------------------------------------------------------------------------
// ToyFaceEncoder

ToyFaceEncoder::ToyFaceEncoder(std::uint64_t seed, int dim, int grid)
    : grid_(grid) {
  const auto n = static_cast<Eigen::Index>(grid) * grid;
  map_ = gaussian_matrix(mix_seed(seed, fnv1a("face")), dim, n,
                         1.0 / std::sqrt(static_cast<double>(n)));
}

Vector ToyFaceEncoder::encode(const Image& frame, const Image* mask) const {
  if (frame.empty()) throw EmptyImage("empty frame");
  if (mask && (mask->width != frame.width || mask->height != frame.height)) {
    throw DimensionMismatch("mask size does not match frame size");
  }
  return map_ * downsample_gray(frame, mask, grid_);
}

Image ToyFaceEncoder::prototype_frame(const Vector& target, int size) const {
  if (target.size() != map_.rows()) {
    throw DimensionMismatch("target width does not match encoder");
  }
  // Least-squares-ish inversion: for a wide Gaussian map, map * map^T is
  // close to a multiple of the identity, so map^T * target encodes back to
  // (roughly) the target direction.
  Vector g = map_.transpose() * target;
  const double peak = g.cwiseAbs().maxCoeff();
  if (peak > 0.0) g *= 0.9 / peak;
  Image out(size, size, 1);
  const int cell = std::max(1, size / grid_);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int gy = std::min(grid_ - 1, y / cell);
      const int gx = std::min(grid_ - 1, x / cell);
      const double v = 127.5 * (1.0 + g(static_cast<Eigen::Index>(gy) * grid_ + gx));
      out.at(y, x, 0) = static_cast<std::uint8_t>(
          std::clamp<long>(std::lround(v), 0, 255));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ToyTextEncoder

ToyTextEncoder::ToyTextEncoder(std::uint64_t seed, int dim, int token_dim)
    : seed_(seed) {
  map_ = gaussian_matrix(mix_seed(seed, fnv1a("text-map")), dim, token_dim,
                         1.0 / std::sqrt(static_cast<double>(token_dim)));
}

Vector ToyTextEncoder::token_embedding(const std::string& token) const {
  return gaussian_vector(mix_seed(seed_, fnv1a(token)), map_.cols(), 1.0);
}

Vector ToyTextEncoder::encode(const std::vector<std::string>& tokens,
                              const Matrix& learnable) const {
  const auto total =
      static_cast<Eigen::Index>(tokens.size()) + learnable.rows();
  if (total == 0) throw EmptySequence("no tokens to encode");
  if (learnable.rows() > 0 && learnable.cols() != map_.cols()) {
    throw DimensionMismatch("learnable token width does not match encoder");
  }
  Vector h = Vector::Zero(map_.cols());
  for (const auto& tok : tokens) h += token_embedding(tok);
  for (Eigen::Index i = 0; i < learnable.rows(); ++i) {
    h += learnable.row(i).transpose();
  }
  return map_ * (h / static_cast<double>(total));
}

Matrix ToyTextEncoder::grad_learnable(const std::vector<std::string>& tokens,
                                      const Matrix& learnable,
                                      const Vector& grad_out) const {
  const auto total =
      static_cast<Eigen::Index>(tokens.size()) + learnable.rows();
  const Vector g = map_.transpose() * grad_out / static_cast<double>(total);
  Matrix grads(learnable.rows(), map_.cols());
  for (Eigen::Index i = 0; i < learnable.rows(); ++i) {
    grads.row(i) = g.transpose();
  }
  return grads;
}

// ---------------------------------------------------------------------------
// ToyAVFrontEnd

ToyAVFrontEnd::ToyAVFrontEnd(std::uint64_t seed, int raw_dim) {
  map_ = gaussian_matrix(mix_seed(seed, fnv1a("av-frontend")), raw_dim,
                         kSummaryDim, 1.0 / std::sqrt(double(kSummaryDim)));
}

Vector ToyAVFrontEnd::block_summary(const Image& img) {
  Vector out(kSummaryDim);
  for (int gy = 0; gy < kGridY; ++gy) {
    const int y0 = gy * img.height / kGridY;
    const int y1 = std::max(y0 + 1, (gy + 1) * img.height / kGridY);
    for (int gx = 0; gx < kGridX; ++gx) {
      const int x0 = gx * img.width / kGridX;
      const int x1 = std::max(x0 + 1, (gx + 1) * img.width / kGridX);
      double sum = 0.0;
      int count = 0;
      for (int y = y0; y < y1 && y < img.height; ++y) {
        for (int x = x0; x < x1 && x < img.width; ++x) {
          sum += pixel_gray(img, y, x);
          ++count;
        }
      }
      out(gy * kGridX + gx) = (sum / std::max(count, 1) - 127.5) / 127.5;
    }
  }
  return out;
}

Matrix ToyAVFrontEnd::encode_visual(
    const std::vector<Image>& mouth_crops) const {
  if (mouth_crops.empty()) throw EmptySequence("no mouth crops");
  Matrix summary(static_cast<Eigen::Index>(mouth_crops.size()), kSummaryDim);
  for (std::size_t t = 0; t < mouth_crops.size(); ++t) {
    if (mouth_crops[t].empty()) throw EmptyImage("empty mouth crop");
    summary.row(static_cast<Eigen::Index>(t)) =
        block_summary(mouth_crops[t]).transpose();
  }
  summary.rowwise() -= summary.colwise().mean();
  return summary * map_.transpose();
}

Matrix ToyAVFrontEnd::encode_audio(const Matrix& mel) const {
  if (mel.rows() == 0) throw EmptyAudio("empty mel spectrogram");
  const auto band = mel.cols() / kSummaryDim;
  if (band == 0) throw DimensionMismatch("too few mel bins for band summary");
  Matrix summary(mel.rows(), kSummaryDim);
  for (int b = 0; b < kSummaryDim; ++b) {
    summary.col(b) = mel.middleCols(b * band, band).rowwise().mean();
  }
  summary.rowwise() -= summary.colwise().mean();
  return summary * map_.transpose();
}

// ---------------------------------------------------------------------------

Projections Projections::identity(int d) {
  return {Matrix::Identity(d, d), Matrix::Identity(d, d)};
}

Projections Projections::seeded(std::uint64_t seed, int d, int d_raw) {
  const Matrix shared =
      gaussian_matrix(mix_seed(seed, fnv1a("projection")), d, d_raw,
                      1.0 / std::sqrt(static_cast<double>(d_raw)));
  return {shared, shared};
}

Vector encode_face_sequence(const FaceEncoder& encoder,
                            const std::vector<Image>& frames,
                            const Image* mask) {
  if (frames.empty()) throw EmptySequence("no frames to encode");
  Vector mean = Vector::Zero(encoder.dim());
  for (const auto& frame : frames) mean += encoder.encode(frame, mask);
  mean /= static_cast<double>(frames.size());
  const double norm = mean.norm();
  if (!(norm > 1e-12)) throw NonFinite("degenerate face embedding");
  return mean / norm;
}

Matrix resample_rows(const Matrix& m, Eigen::Index target_rows) {
  if (m.rows() == 0 || target_rows <= 0) {
    throw EmptySequence("nothing to resample");
  }
  Matrix out = Matrix::Zero(target_rows, m.cols());
  Eigen::VectorXi counts = Eigen::VectorXi::Zero(target_rows);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto bucket = std::min(target_rows - 1, r * target_rows / m.rows());
    out.row(bucket) += m.row(r);
    counts(bucket) += 1;
  }
  for (Eigen::Index t = 0; t < target_rows; ++t) {
    if (counts(t) > 0) {
      out.row(t) /= counts(t);
    } else {
      // More video frames than audio rows: fall back to the nearest row.
      const auto nearest = std::min<Eigen::Index>(
          m.rows() - 1, (2 * t + 1) * m.rows() / (2 * target_rows));
      out.row(t) = m.row(nearest);
    }
  }
  return out;
}

FeatureBundle extract_features(const SampleRecord& sample,
                               const std::filesystem::path& base_dir,
                               const FaceEncoder& face_enc,
                               const AVFrontEnd& frontend,
                               const Projections& projections,
                               const MelParams& mel_params) {
  const auto resolve = [&](const std::string& ref) {
    std::filesystem::path p(ref);
    return p.is_relative() ? base_dir / p : p;
  };

  std::vector<Image> frames, mouths;
  frames.reserve(sample.frame_refs.size());
  for (const auto& ref : sample.frame_refs) frames.push_back(load_pnm(resolve(ref)));
  mouths.reserve(sample.mouth_refs.size());
  for (const auto& ref : sample.mouth_refs) mouths.push_back(load_pnm(resolve(ref)));

  Image mask;
  const Image* mask_ptr = nullptr;
  if (sample.mask_ref) {
    mask = load_pnm(resolve(*sample.mask_ref));
    mask_ptr = &mask;
  }

  FeatureBundle bundle;
  bundle.face = encode_face_sequence(face_enc, frames, mask_ptr);

  const Matrix v_raw = frontend.encode_visual(mouths);
  const Waveform wav = load_wav(resolve(sample.audio_ref));
  const Matrix a_full = frontend.encode_audio(compute_mel_spectrogram(wav, mel_params));
  const Matrix a_raw = resample_rows(a_full, v_raw.rows());

  if (projections.visual.cols() != v_raw.cols() ||
      projections.audio.cols() != a_raw.cols()) {
    throw DimensionMismatch("projection input width does not match front-end");
  }
  bundle.visual = v_raw * projections.visual.transpose();
  bundle.audio = a_raw * projections.audio.transpose();
  return bundle;
}

}  // namespace avfd
