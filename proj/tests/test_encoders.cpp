#include <doctest.h>

#include <algorithm>
#include <random>

#include "avfd/encoders.hpp"
#include "avfd/rng.hpp"
#include "test_util.hpp"

using namespace avfd;

namespace {

Image random_image(std::mt19937& rng, int w, int h) {
  Image img(w, h, 1);
  for (auto& p : img.data) p = static_cast<std::uint8_t>(rng());
  return img;
}

}  // namespace

TEST_CASE("face encoder is deterministic and seed-dependent") {
  std::mt19937 rng(1);
  const Image frame = random_image(rng, 64, 64);
  const ToyFaceEncoder a(5, 32), b(5, 32), c(6, 32);
  CHECK(a.encode(frame, nullptr) == b.encode(frame, nullptr));
  CHECK(a.encode(frame, nullptr) != c.encode(frame, nullptr));
}

TEST_CASE("face sequence embedding is frame-order invariant and unit norm") {
  std::mt19937 rng(2);
  std::vector<Image> frames;
  for (int i = 0; i < 6; ++i) frames.push_back(random_image(rng, 64, 64));
  const ToyFaceEncoder enc(9, 64);
  const Vector f = encode_face_sequence(enc, frames);
  CHECK(f.norm() == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<Image> shuffled = frames;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const Vector g = encode_face_sequence(enc, shuffled);
  CHECK((f - g).norm() < 1e-9);

  CHECK_THROWS_AS(encode_face_sequence(enc, {}), EmptySequence);
}

TEST_CASE("prototype frame encodes along its target direction") {
  const ToyFaceEncoder enc(3, 128);
  const Vector target = gaussian_vector(11, 128, 1.0).normalized();
  const Image proto = enc.prototype_frame(target, 64);
  const Vector f = enc.encode(proto, nullptr).normalized();
  CHECK(f.dot(target) > 0.8);
}

TEST_CASE("text encoder gradient matches finite differences") {
  const ToyTextEncoder enc(4, 16, 8);
  const std::vector<std::string> tokens = enc.tokenize("A real Face");
  CHECK(tokens == std::vector<std::string>{"a", "real", "face"});

  Matrix learnable = gaussian_matrix(21, 2, 8, 0.1);
  const Vector grad_out = gaussian_vector(22, 16, 1.0);
  const Matrix g = enc.grad_learnable(tokens, learnable, grad_out);
  const double eps = 1e-6;
  for (Eigen::Index i = 0; i < learnable.rows(); ++i) {
    for (Eigen::Index j = 0; j < learnable.cols(); ++j) {
      Matrix lp = learnable, lm = learnable;
      lp(i, j) += eps;
      lm(i, j) -= eps;
      const double fd = grad_out.dot(enc.encode(tokens, lp) -
                                     enc.encode(tokens, lm)) / (2 * eps);
      CHECK(g(i, j) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("front-end streams share the alignment map") {
  const ToyAVFrontEnd fe(13, 32);
  std::mt19937 rng(5);
  std::vector<Image> mouths;
  for (int t = 0; t < 8; ++t) mouths.push_back(random_image(rng, 32, 32));
  const Matrix v = fe.encode_visual(mouths);
  CHECK(v.rows() == 8);
  CHECK(v.cols() == 32);
  // Temporal centering: column means vanish.
  CHECK(v.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);

  const Image flat(32, 32, 1);
  CHECK(ToyAVFrontEnd::block_summary(flat).cwiseAbs().maxCoeff() ==
        doctest::Approx(1.0));  // all-zero pixels map to -1
}

TEST_CASE("resample_rows pools buckets and handles both directions") {
  Matrix m(6, 2);
  m << 0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5;
  const Matrix down = resample_rows(m, 3);
  CHECK(down(0, 0) == doctest::Approx(0.5));
  CHECK(down(1, 0) == doctest::Approx(2.5));
  CHECK(down(2, 0) == doctest::Approx(4.5));

  const Matrix up = resample_rows(down, 6);
  CHECK(up.rows() == 6);
  CHECK_THROWS_AS(resample_rows(Matrix(0, 2), 3), EmptySequence);
}

TEST_CASE("seeded projections start identical across streams") {
  const Projections p = Projections::seeded(17, 16, 8);
  CHECK(p.visual == p.audio);
  const Projections id = Projections::identity(4);
  CHECK(id.visual == Matrix::Identity(4, 4));
}
