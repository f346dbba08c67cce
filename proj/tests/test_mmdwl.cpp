#include <doctest.h>

#include <cmath>

#include "avfd/mmdwl.hpp"
#include "avfd/rng.hpp"

using namespace avfd;

TEST_CASE("generated weights live on the simplex") {
  const int d = 16;
  const WeightGenerator gen = WeightGenerator::seeded(7, 4 * d, 32);
  for (int s = 0; s < 1000; ++s) {
    const Vector fp = gaussian_vector(mix_seed(s, 0), 2 * d, 1.0);
    const Vector v = gaussian_vector(mix_seed(s, 1), d, 1.0);
    const Vector a = gaussian_vector(mix_seed(s, 2), d, 1.0);
    const Vector w = generate_weights(gen, fp, v, a);
    REQUIRE(w.size() == 3);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(w.minCoeff() > 0.0);
  }
}

TEST_CASE("modulation closed forms") {
  const ModulationVector mod;

  SUBCASE("uniform weights with the default bias") {
    const Vector w = modulate(Vector::Constant(3, 1.0 / 3.0), mod);
    CHECK(w(0) == doctest::Approx(0.29046078707019063).epsilon(1e-4));
    CHECK(w(1) == doctest::Approx(0.3547696064649047).epsilon(1e-4));
    CHECK(w(2) == doctest::Approx(0.3547696064649047).epsilon(1e-4));
  }
  SUBCASE("softmax is invariant to a constant shift of the bias") {
    const Vector w_hat = (Vector(3) << 0.5, 0.2, 0.3).finished();
    ModulationVector shifted;
    shifted.alpha = mod.alpha.array() + 3.7;
    const Vector a = modulate(w_hat, mod);
    const Vector b = modulate(w_hat, shifted);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("logit example: softmax(0, 0, ln 2)") {
    ModulationVector zero;
    zero.alpha = Vector::Zero(3);
    const Vector w =
        modulate((Vector(3) << 0.0, 0.0, std::log(2.0)).finished(), zero);
    CHECK(w(0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(w(1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(w(2) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("alignment matrix geometry") {
  const Matrix v = gaussian_matrix(4, 6, 8, 1.0);
  const Matrix a = gaussian_matrix(5, 6, 8, 1.0);
  const AlignmentMatrix am = alignment_matrix(v, a, 0.1, 2);
  CHECK(am.phi.rows() == 6);
  CHECK(am.in_window(0, 2));
  CHECK(!am.in_window(0, 3));
  // Cosine similarities scaled by 1/tau stay within [-1/tau, 1/tau].
  CHECK(am.phi.cwiseAbs().maxCoeff() <= 10.0 + 1e-9);
  // Mismatched frame counts are a data error.
  CHECK_THROWS_AS(alignment_matrix(v, a.topRows(3), 0.1, 2),
                  DimensionMismatch);
}

TEST_CASE("alignment loss equals ln m under uniform in-window logits") {
  for (const int window : {1, 2, 15}) {
    AlignmentMatrix am;
    am.phi = Matrix::Constant(6, 6, 0.37);
    am.window = window;
    am.tau_av = 0.1;
    double expected = 0.0;
    for (int i = 0; i < 6; ++i) {
      const int m = std::min(5, i + window) - std::max(0, i - window) + 1;
      expected += std::log(static_cast<double>(m));
    }
    CHECK(av_alignment_loss(am) == doctest::Approx(expected / 6).epsilon(1e-9));
  }
}

TEST_CASE("alignment gradient matches central finite differences") {
  const Eigen::Index F = 4, d = 8;
  for (int seed = 0; seed < 20; ++seed) {
    const Matrix v = gaussian_matrix(mix_seed(seed, 1), F, d, 1.0);
    const Matrix a = gaussian_matrix(mix_seed(seed, 2), F, d, 1.0);
    const double tau = 0.5;
    const int window = 2;
    Matrix dv, da;
    av_alignment_loss_backward(v, a, tau, window, &dv, &da);

    const double eps = 1e-6;
    const auto loss = [&](const Matrix& vv, const Matrix& aa) {
      return av_alignment_loss(alignment_matrix(vv, aa, tau, window));
    };
    for (Eigen::Index i = 0; i < F; ++i) {
      for (Eigen::Index j = 0; j < d; j += 3) {
        Matrix vp = v, vm = v;
        vp(i, j) += eps;
        vm(i, j) -= eps;
        const double fd = (loss(vp, a) - loss(vm, a)) / (2 * eps);
        CHECK(dv(i, j) == doctest::Approx(fd).epsilon(1e-4));

        Matrix ap = a, am = a;
        ap(i, j) += eps;
        am(i, j) -= eps;
        const double fda = (loss(v, ap) - loss(v, am)) / (2 * eps);
        CHECK(da(i, j) == doctest::Approx(fda).epsilon(1e-4));
      }
    }
  }
}

TEST_CASE("perfect alignment scores below shuffled alignment") {
  const Matrix v = gaussian_matrix(77, 10, 16, 1.0);
  Matrix a_shuffled(10, 16);
  for (int t = 0; t < 10; ++t) a_shuffled.row(t) = v.row((t + 5) % 10);
  const double aligned = av_alignment_loss(alignment_matrix(v, v, 0.1, 15));
  const double shuffled =
      av_alignment_loss(alignment_matrix(v, a_shuffled, 0.1, 15));
  CHECK(aligned < shuffled);
}

TEST_CASE("frame scores compose the weighted channels") {
  AlignmentMatrix am;
  am.phi = gaussian_matrix(8, 5, 5, 1.0);
  am.window = 15;
  am.tau_av = 0.1;
  Vector r, c;
  alignment_channels(am, &r, &c);
  const Vector w = (Vector(3) << 0.2, 0.5, 0.3).finished();
  const double u_fp = -0.4;
  const Vector s = frame_scores(am, u_fp, w);
  REQUIRE(s.size() == 5);
  for (Eigen::Index t = 0; t < 5; ++t) {
    CHECK(s(t) ==
          doctest::Approx(0.2 * u_fp + 0.5 * r(t) + 0.3 * c(t)).epsilon(1e-12));
  }
  // Channels are negative log-probabilities: nonnegative.
  CHECK(r.minCoeff() >= 0.0);
  CHECK(c.minCoeff() >= 0.0);
}
