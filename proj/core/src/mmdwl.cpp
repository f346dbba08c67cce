#include "avfd/mmdwl.hpp"

#include <cmath>

#include "avfd/errors.hpp"
#include "avfd/rng.hpp"

namespace avfd {

namespace {

Vector softmax(const Vector& logits) {
  const Vector shifted = logits.array() - logits.maxCoeff();
  const Vector e = shifted.array().exp();
  return e / e.sum();
}

// Zero rows stay zero (similarity 0); callers never divide by these norms.
Matrix normalize_rows(const Matrix& m, Vector* norms = nullptr) {
  Matrix out(m.rows(), m.cols());
  if (norms) norms->resize(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    if (norms) (*norms)(i) = norm;
    out.row(i) = norm > 1e-12 ? Matrix(m.row(i) / norm) : Matrix(m.row(i));
  }
  return out;
}

// In-window log-sum-exp of row/column `q` of phi and the softmax prob mass
// at the diagonal entry.
double in_window_lse(const AlignmentMatrix& am, Eigen::Index q, bool row) {
  const auto F = am.frames();
  double mx = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < F; ++k) {
    if (!am.in_window(q, k)) continue;
    mx = std::max(mx, row ? am.phi(q, k) : am.phi(k, q));
  }
  double sum = 0.0;
  for (Eigen::Index k = 0; k < F; ++k) {
    if (!am.in_window(q, k)) continue;
    sum += std::exp((row ? am.phi(q, k) : am.phi(k, q)) - mx);
  }
  return mx + std::log(sum);
}

}  // namespace

WeightGenerator WeightGenerator::seeded(std::uint64_t seed, int input_dim,
                                        int hidden) {
  WeightGenerator gen;
  gen.w1 = gaussian_matrix(mix_seed(seed, fnv1a("mlp-w1")), hidden, input_dim,
                           1.0 / std::sqrt(static_cast<double>(input_dim)));
  gen.b1 = Vector::Zero(hidden);
  gen.w2 = gaussian_matrix(mix_seed(seed, fnv1a("mlp-w2")), 3, hidden,
                           1.0 / std::sqrt(static_cast<double>(hidden)));
  gen.b2 = Vector::Zero(3);
  return gen;
}

Vector WeightGenerator::logits(const Vector& x) const {
  if (x.size() != w1.cols()) {
    throw DimensionMismatch("weight generator input size mismatch");
  }
  const Vector h = (w1 * x + b1).cwiseMax(0.0);
  return w2 * h + b2;
}

Vector generate_weights(const WeightGenerator& gen, const Vector& fp,
                        const Vector& v_mean, const Vector& a_mean) {
  // Input concatenation order is [a, v, fp]; weight order stays (fp, v, a).
  Vector x(a_mean.size() + v_mean.size() + fp.size());
  x << a_mean, v_mean, fp;
  return softmax(gen.logits(x));
}

Vector modulate(const Vector& w_hat, const ModulationVector& mod) {
  if (w_hat.size() != 3 || mod.alpha.size() != 3) {
    throw DimensionMismatch("modulation expects 3-vectors");
  }
  if (!mod.alpha.allFinite()) throw NonFinite("non-finite modulation vector");
  return softmax(w_hat + mod.alpha);
}

AlignmentMatrix alignment_matrix(const Matrix& v, const Matrix& a,
                                 double tau_av, int window) {
  if (v.rows() == 0) throw EmptySequence("no frames for alignment");
  if (v.rows() != a.rows() || v.cols() != a.cols()) {
    throw DimensionMismatch("visual/audio feature shapes differ");
  }
  if (tau_av <= 0.0) throw InvalidSpec("tau_av must be positive");
  if (window < 0) throw InvalidSpec("window must be non-negative");
  AlignmentMatrix am;
  am.window = window;
  am.tau_av = tau_av;
  am.phi = normalize_rows(v) * normalize_rows(a).transpose() / tau_av;
  return am;
}

double av_alignment_loss(const AlignmentMatrix& am) {
  const auto F = am.frames();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < F; ++i) {
    loss += in_window_lse(am, i, /*row=*/true) - am.phi(i, i);
  }
  return loss / static_cast<double>(F);
}

void av_alignment_loss_backward(const Matrix& v, const Matrix& a,
                                double tau_av, int window, Matrix* dv,
                                Matrix* da) {
  const AlignmentMatrix am = alignment_matrix(v, a, tau_av, window);
  const auto F = am.frames();
  Vector v_norms, a_norms;
  const Matrix v_hat = normalize_rows(v, &v_norms);
  const Matrix a_hat = normalize_rows(a, &a_norms);

  // dL/dPhi_ik = (softmax_ik - delta_ik) / F within the window.
  Matrix dphi = Matrix::Zero(F, F);
  for (Eigen::Index i = 0; i < F; ++i) {
    const double lse = in_window_lse(am, i, /*row=*/true);
    for (Eigen::Index k = 0; k < F; ++k) {
      if (!am.in_window(i, k)) continue;
      dphi(i, k) = (std::exp(am.phi(i, k) - lse) - (i == k ? 1.0 : 0.0)) /
                   static_cast<double>(F);
    }
  }

  const Matrix dv_hat = dphi * a_hat / tau_av;
  const Matrix da_hat = dphi.transpose() * v_hat / tau_av;
  dv->resize(v.rows(), v.cols());
  da->resize(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < F; ++i) {
    if (v_norms(i) > 1e-12) {
      const Vector g = dv_hat.row(i).transpose();
      const Vector u = v_hat.row(i).transpose();
      dv->row(i) = ((g - u * u.dot(g)) / v_norms(i)).transpose();
    } else {
      dv->row(i).setZero();
    }
    if (a_norms(i) > 1e-12) {
      const Vector g = da_hat.row(i).transpose();
      const Vector u = a_hat.row(i).transpose();
      da->row(i) = ((g - u * u.dot(g)) / a_norms(i)).transpose();
    } else {
      da->row(i).setZero();
    }
  }
}

void alignment_channels(const AlignmentMatrix& am, Vector* row_channel,
                        Vector* col_channel) {
  const auto F = am.frames();
  row_channel->resize(F);
  col_channel->resize(F);
  for (Eigen::Index t = 0; t < F; ++t) {
    (*row_channel)(t) = in_window_lse(am, t, /*row=*/true) - am.phi(t, t);
    (*col_channel)(t) = in_window_lse(am, t, /*row=*/false) - am.phi(t, t);
  }
}

Vector frame_scores(const AlignmentMatrix& am, double u_fp, const Vector& w) {
  if (w.size() != 3) throw DimensionMismatch("expected 3 fusion weights");
  if (!std::isfinite(u_fp) || !w.allFinite()) {
    throw NonFinite("non-finite frame score inputs");
  }
  Vector r, c;
  alignment_channels(am, &r, &c);
  return w(0) * u_fp * Vector::Ones(am.frames()) + w(1) * r + w(2) * c;
}

}  // namespace avfd
