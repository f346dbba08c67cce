#pragma once

#include <cstdint>

#include "avfd/types.hpp"

namespace avfd {

/// MLP mapping concat[a_mean, v_mean, fp] -> 3 logits ordered (fp, v, a).
struct WeightGenerator {
  Matrix w1;  // hidden x input
  Vector b1;
  Matrix w2;  // 3 x hidden
  Vector b2;

  static WeightGenerator seeded(std::uint64_t seed, int input_dim,
                                int hidden = 256);

  Eigen::Index input_dim() const { return w1.cols(); }
  Vector logits(const Vector& x) const;
};

/// Fixed fusion bias, ordered (fp, v, a); default (-0.1, +0.1, +0.1).
struct ModulationVector {
  Vector alpha = (Vector(3) << -0.1, 0.1, 0.1).finished();
};

/// w_hat = softmax(MLP(concat[a_mean, v_mean, fp])).
Vector generate_weights(const WeightGenerator& gen, const Vector& fp,
                        const Vector& v_mean, const Vector& a_mean);

/// w = softmax(w_hat + alpha).
Vector modulate(const Vector& w_hat, const ModulationVector& mod);

/// Pairwise audio-visual similarities Phi_ik = <v_hat_i, a_hat_k> / tau,
/// with a temporal neighborhood |i-k| <= window.
struct AlignmentMatrix {
  Matrix phi;
  int window = 15;
  double tau_av = 0.1;

  Eigen::Index frames() const { return phi.rows(); }
  bool in_window(Eigen::Index i, Eigen::Index k) const {
    return std::abs(static_cast<long>(i - k)) <= window;
  }
};

AlignmentMatrix alignment_matrix(const Matrix& v, const Matrix& a,
                                 double tau_av, int window);

/// Negative average in-window alignment probability of the diagonal.
double av_alignment_loss(const AlignmentMatrix& phi);

/// Gradients of av_alignment_loss with respect to the (unnormalized) v and
/// a rows that produced the matrix.
void av_alignment_loss_backward(const Matrix& v, const Matrix& a,
                                double tau_av, int window, Matrix* dv,
                                Matrix* da);

/// Per-frame negative log in-window softmax probability of the diagonal,
/// with the visual stream as query (rows) and the audio stream as query
/// (columns).
void alignment_channels(const AlignmentMatrix& phi, Vector* row_channel,
                        Vector* col_channel);

/// Fused per-frame anomaly: s_t = w_fp*u_fp + w_v*r_t + w_a*c_t, where r_t
/// and c_t are the row/column alignment channels.
Vector frame_scores(const AlignmentMatrix& phi, double u_fp, const Vector& w);

}  // namespace avfd
