// End-to-end acceptance harness. Prints one PASS/FAIL line per criterion
// and exits nonzero if any fail. Runs entirely on the deterministic toy
// backbones and the synthetic dataset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "avfd/evaluation.hpp"
#include "avfd/perturbations.hpp"
#include "avfd/rng.hpp"
#include "avfd/synth.hpp"
#include "avfd/training.hpp"

namespace fs = std::filesystem;
using namespace avfd;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s — %s\n", criterion, ok ? "PASS" : "FAIL",
              detail.c_str());
  if (!ok) ++g_failures;
}

double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-6);
}

struct PipelineRun {
  DatasetManifest train_set;
  DatasetManifest held_set;
  fs::path train_dir, held_dir, metrics_path;
  Checkpoint ckpt;
  EvaluationResult eval;
  double seconds = 0.0;
};

PipelineRun run_pipeline(const fs::path& root) {
  const auto t0 = std::chrono::steady_clock::now();
  PipelineRun run;

  SynthConfig sc;          // default geometry: d=512, 10 frames, 64x64 faces
  sc.n = 200;
  sc.seed = 101;
  sc.hyper.seed = 101;
  run.train_dir = root / "train-set";
  run.train_set = synthesize_dataset(sc, run.train_dir);

  SynthConfig held = sc;
  held.n = 100;
  held.seed = 202;         // fresh clips, same planted structure
  held.all_test = true;
  run.held_dir = root / "held-set";
  run.held_set = synthesize_dataset(held, run.held_dir);

  TrainConfig tc;          // defaults: lr 9e-4, batch 512, 30 epochs
  tc.seed = 101;
  tc.hyper = sc.hyper;
  const ToyEncoderSet enc(tc.hyper.seed, tc.hyper);
  run.ckpt = train(run.train_set, run.train_dir, tc, enc);

  run.eval = evaluate(run.held_set, run.held_dir, run.ckpt.state, enc);
  run.metrics_path = root / "metrics.json";
  write_metrics_record(run.eval, run.metrics_path);

  run.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0).count();
  return run;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// --- brute-force metric oracles -------------------------------------------

double auc_oracle(const std::vector<double>& s, const std::vector<Label>& y) {
  double num = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != Label::kFake) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != Label::kReal) continue;
      pairs += 1.0;
      num += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return num / pairs;
}

double ap_oracle(std::vector<double> s, const std::vector<Label>& y) {
  std::vector<std::size_t> idx(s.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return s[a] > s[b]; });
  double tp = 0.0, acc = 0.0, n_pos = 0.0;
  for (const Label l : y) n_pos += l == Label::kFake;
  for (std::size_t rank = 0; rank < idx.size(); ++rank) {
    if (y[idx[rank]] == Label::kFake) {
      tp += 1.0;
      acc += tp / static_cast<double>(rank + 1);
    }
  }
  return acc / n_pos;
}

double mmd2_oracle(const Matrix& x, const Matrix& y, bool unbiased) {
  std::vector<double> dists;
  Matrix all(x.rows() + y.rows(), x.cols());
  all << x, y;
  for (Eigen::Index i = 0; i < all.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < all.rows(); ++j) {
      dists.push_back((all.row(i) - all.row(j)).norm());
    }
  }
  std::sort(dists.begin(), dists.end());
  double sigma = dists[dists.size() / 2];
  const double gamma = 1.0 / (2.0 * sigma * sigma);
  const auto k = [&](Eigen::Index i, Eigen::Index j) {
    return std::exp(-gamma * (all.row(i) - all.row(j)).squaredNorm());
  };
  const auto m = x.rows(), n = y.rows();
  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!(unbiased && i == j)) kxx += k(i, j);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(unbiased && i == j)) kyy += k(m + i, m + j);
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kxy += k(i, m + j);
  }
  const double dm = static_cast<double>(m), dn = static_cast<double>(n);
  if (unbiased) {
    return kxx / (dm * (dm - 1)) + kyy / (dn * (dn - 1)) - 2 * kxy / (dm * dn);
  }
  return kxx / (dm * dm) + kyy / (dn * dn) - 2 * kxy / (dm * dn);
}

// --- criteria ---------------------------------------------------------------

void criterion_2() {
  bool ok = true;
  std::ostringstream msg;

  PolarityEmbeddings emb;
  emb.p = Vector::Unit(8, 0);
  emb.n = Vector::Unit(8, 1);
  emb.tau = 0.07;
  const Vector f = (emb.p + emb.n).normalized();  // s+ = s-
  const double l2 = ftca_loss({f}, emb);
  ok &= std::abs(l2 - std::log(2.0)) < 1e-9;
  msg << "ftca(s+=s-)=" << l2;

  AlignmentMatrix am;
  am.phi = Matrix::Constant(5, 5, 1.3);
  am.window = 1;  // every row sees m in {2,3} neighbors
  double expected = 0.0;
  for (int i = 0; i < 5; ++i) {
    expected += std::log(double(std::min(4, i + 1) - std::max(0, i - 1) + 1));
  }
  expected /= 5.0;
  const double lav = av_alignment_loss(am);
  ok &= std::abs(lav - expected) < 1e-9;
  msg << ", L_av(uniform)=" << lav << " vs ln m avg " << expected;

  // Componentwise sum with unit coefficients on a tiny planted batch.
  ModelHyper h;
  h.d = 32;
  h.d_raw = 8;
  h.d_tok = 8;
  h.hidden = 16;
  h.seed = 3;
  const ToyEncoderSet enc(h.seed, h);
  const ModelState state = ModelState::init(h, PromptHierarchy::defaults());
  std::vector<RawFeatures> batch(3);
  for (int i = 0; i < 3; ++i) {
    batch[i].face = gaussian_vector(mix_seed(40, i), h.d, 1.0).normalized();
    batch[i].v_raw = gaussian_matrix(mix_seed(41, i), 6, h.d_raw, 1.0);
    batch[i].a_raw = gaussian_matrix(mix_seed(42, i), 6, h.d_raw, 1.0);
  }
  const LossBreakdown l = total_loss(batch, state, enc.text, 1.0, 1.0);
  ok &= std::abs(l.total - (l.av + l.ft)) < 1e-12;
  msg << ", |L-(L_av+L_ft)|=" << std::abs(l.total - (l.av + l.ft));

  report(2, ok, msg.str());
}

void criterion_3() {
  double worst = 0.0;
  const double eps = 1e-6;
  for (int seed = 0; seed < 20; ++seed) {
    // Contrastive loss gradients, d=8, N=4.
    std::vector<Vector> faces;
    for (int i = 0; i < 4; ++i) {
      faces.push_back(gaussian_vector(mix_seed(seed, i), 8, 1.0).normalized());
    }
    PolarityEmbeddings emb;
    emb.p = gaussian_vector(mix_seed(seed, 90), 8, 1.0);
    emb.n = gaussian_vector(mix_seed(seed, 91), 8, 1.0);
    emb.tau = 0.3;
    Vector dp, dn;
    ftca_loss_backward(faces, emb, &dp, &dn);
    for (Eigen::Index j = 0; j < 8; ++j) {
      PolarityEmbeddings a = emb, b = emb;
      a.p(j) += eps;
      b.p(j) -= eps;
      worst = std::max(worst, rel_err(dp(j), (ftca_loss(faces, a) -
                                              ftca_loss(faces, b)) / (2 * eps)));
      a = emb, b = emb;
      a.n(j) += eps;
      b.n(j) -= eps;
      worst = std::max(worst, rel_err(dn(j), (ftca_loss(faces, a) -
                                              ftca_loss(faces, b)) / (2 * eps)));
    }

    // Alignment loss gradients, F=4, d=8.
    const Matrix v = gaussian_matrix(mix_seed(seed, 92), 4, 8, 1.0);
    const Matrix a4 = gaussian_matrix(mix_seed(seed, 93), 4, 8, 1.0);
    Matrix dv, da;
    av_alignment_loss_backward(v, a4, 0.5, 2, &dv, &da);
    const auto loss = [&](const Matrix& vv, const Matrix& aa) {
      return av_alignment_loss(alignment_matrix(vv, aa, 0.5, 2));
    };
    for (Eigen::Index i = 0; i < 4; ++i) {
      for (Eigen::Index j = 0; j < 8; ++j) {
        Matrix vp = v, vm = v;
        vp(i, j) += eps;
        vm(i, j) -= eps;
        worst = std::max(worst,
                         rel_err(dv(i, j), (loss(vp, a4) - loss(vm, a4)) /
                                               (2 * eps)));
        Matrix ap = a4, am = a4;
        ap(i, j) += eps;
        am(i, j) -= eps;
        worst = std::max(worst,
                         rel_err(da(i, j), (loss(v, ap) - loss(v, am)) /
                                               (2 * eps)));
      }
    }
  }
  std::ostringstream msg;
  msg << "max relative gradient error " << worst << " over 20 seeds";
  report(3, worst < 1e-4, msg.str());
}

void criterion_4() {
  std::mt19937_64 rng(404);
  std::normal_distribution<double> dist(0.0, 3.0);
  bool ok = true;
  double worst_shift = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Vector s(1 + rng() % 25);
    for (Eigen::Index t = 0; t < s.size(); ++t) s(t) = dist(rng);
    const double agg = aggregate_video_score(s);
    const double mx = s.maxCoeff();
    ok &= agg >= mx - 1e-12;
    ok &= agg <= mx + std::log(double(s.size())) + 1e-12;
    const double shifted = aggregate_video_score(Vector(s.array() + 1.5));
    worst_shift = std::max(worst_shift, std::abs(shifted - (agg + 1.5)));
  }
  ok &= worst_shift < 1e-9;
  std::ostringstream msg;
  msg << "bounds held for 1000 vectors, worst shift error " << worst_shift;
  report(4, ok, msg.str());
}

void criterion_5() {
  bool ok = true;
  const WeightGenerator gen = WeightGenerator::seeded(5, 4 * 16, 32);
  for (int s = 0; s < 1000; ++s) {
    const Vector w = modulate(
        generate_weights(gen, gaussian_vector(mix_seed(s, 0), 32, 1.0),
                         gaussian_vector(mix_seed(s, 1), 16, 1.0),
                         gaussian_vector(mix_seed(s, 2), 16, 1.0)),
        ModulationVector{});
    ok &= std::abs(w.sum() - 1.0) < 1e-9 && w.minCoeff() > 0.0;
  }
  const Vector wu = modulate(Vector::Constant(3, 1.0 / 3.0),
                             ModulationVector{});
  ok &= std::abs(wu(0) - 0.2905) < 1e-4 && std::abs(wu(1) - 0.3548) < 1e-4 &&
        std::abs(wu(2) - 0.3548) < 1e-4;

  ModulationVector shifted;
  shifted.alpha = ModulationVector{}.alpha.array() + 2.0;
  const Vector base = (Vector(3) << 0.4, 0.35, 0.25).finished();
  const double shift_err =
      (modulate(base, ModulationVector{}) - modulate(base, shifted))
          .cwiseAbs().maxCoeff();
  ok &= shift_err < 1e-9;

  std::ostringstream msg;
  msg << "simplex held for 1000 inputs; uniform+alpha = (" << wu(0) << ", "
      << wu(1) << ", " << wu(2) << "); shift error " << shift_err;
  report(5, ok, msg.str());
}

void criterion_6() {
  std::mt19937 rng(606);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + int(rng() % 99);
    std::vector<double> s;
    std::vector<Label> y;
    bool has_r = false, has_f = false;
    for (int i = 0; i < n; ++i) {
      s.push_back(double(rng() % 8) / 4.0);
      y.push_back(rng() % 2 ? Label::kFake : Label::kReal);
      has_r |= y.back() == Label::kReal;
      has_f |= y.back() == Label::kFake;
    }
    if (!has_r || !has_f) continue;
    worst = std::max(worst, std::abs(roc_auc(s, y) - auc_oracle(s, y)));
    worst = std::max(worst,
                     std::abs(average_precision(s, y) - ap_oracle(s, y)));
  }
  const Matrix x = gaussian_matrix(61, 50, 3, 1.0);
  const Matrix y50 = gaussian_matrix(62, 50, 3, 1.0).array() + 0.4;
  const double mmd_err =
      std::max(std::abs(mmd2(x, y50, true) - mmd2_oracle(x, y50, true)),
               std::abs(mmd2(x, y50, false) - mmd2_oracle(x, y50, false)));
  const double self_biased = std::abs(mmd2(x, x, false));
  const bool ok = worst < 1e-12 && mmd_err < 1e-9 && self_biased < 1e-12;
  std::ostringstream msg;
  msg << "AP/AUC worst dev " << worst << ", mmd2 dev " << mmd_err
      << ", biased self " << self_biased;
  report(6, ok, msg.str());
}

void criterion_7(const PipelineRun& run, const fs::path& root) {
  bool ok = true;
  std::ostringstream msg;

  const CorruptionSpec defaults_check = CorruptionSpec::parse("blur");
  ok &= defaults_check.quality == 20 && defaults_check.scale == 0.5 &&
        defaults_check.ksize == 5 && defaults_check.sigma == 25.0 &&
        defaults_check.block == 10;

  std::mt19937 rng(707);
  Image img(24, 24, 3);
  for (auto& p : img.data) p = std::uint8_t(rng());
  CorruptionSpec inv;
  inv.kind = CorruptionKind::kInvert;
  ok &= apply_corruption(apply_corruption(img, inv), inv) == img;

  Image hand(2, 2, 1);
  hand.at(0, 0) = 0;
  hand.at(0, 1) = 255;
  hand.at(1, 0) = 255;
  hand.at(1, 1) = 0;
  CorruptionSpec pix;
  pix.kind = CorruptionKind::kPixelation;
  pix.block = 2;
  const Image pixed = apply_corruption(hand, pix);
  for (const auto p : pixed.data) ok &= p == 127;

  // Kernel sum 1: a constant image must pass through blur unchanged.
  Image flat(16, 16, 1);
  for (auto& p : flat.data) p = 173;
  ok &= apply_corruption(flat, CorruptionSpec::parse("blur")) == flat;

  const CorruptionSpec noise = CorruptionSpec::parse("noise:sigma=25,seed=7");
  ok &= apply_corruption(img, noise) == apply_corruption(img, noise);

  // Mild corruptions keep the synthetic separability.
  const ToyEncoderSet enc(run.ckpt.state.hyper.seed, run.ckpt.state.hyper);
  const double clean_auc = run.eval.metrics.at("all").auc;
  for (const char* kind : {"blur", "resize"}) {
    const fs::path out = root / (std::string("held-") + kind);
    const DatasetManifest corrupted = corrupt_dataset(
        run.held_set, run.held_dir, CorruptionSpec::parse(kind), out);
    const EvaluationResult ev = evaluate(corrupted, out, run.ckpt.state, enc);
    const double auc = ev.metrics.at("all").auc;
    ok &= std::abs(auc - clean_auc) <= 0.05;
    msg << kind << " AUC " << auc << " vs clean " << clean_auc << "; ";
  }
  report(7, ok, msg.str());
}

void criterion_8(const PipelineRun& run) {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{100.0, 101.0};
  bool ok = score_overlap(a, a) == 1.0 && score_overlap(a, b) == 0.0;

  Matrix real_feat(0, 3), fake_feat(0, 3);
  std::vector<const ScoreReport*> real, fake;
  for (const auto& r : run.eval.reports) {
    (r.label == Label::kReal ? real : fake).push_back(&r);
  }
  real_feat.resize(Eigen::Index(real.size()), 3);
  fake_feat.resize(Eigen::Index(fake.size()), 3);
  for (std::size_t i = 0; i < real.size(); ++i) {
    real_feat.row(Eigen::Index(i)) = real[i]->channel_feature.transpose();
  }
  for (std::size_t i = 0; i < fake.size(); ++i) {
    fake_feat.row(Eigen::Index(i)) = fake[i]->channel_feature.transpose();
  }
  const double m2 = mmd2(real_feat, fake_feat, true);
  ok &= m2 > 1e-3;
  std::ostringstream msg;
  msg << "overlap identities held; real-vs-fake feature mmd2 " << m2;
  report(8, ok, msg.str());
}

}  // namespace

int main() {
  const fs::path root =
      fs::temp_directory_path() /
      ("avfd-acceptance-" + std::to_string(std::random_device{}()));
  fs::create_directories(root);

  const PipelineRun run = run_pipeline(root / "run1");
  {
    const auto& m = run.eval.metrics.at("all");
    std::ostringstream msg;
    msg << "AUC " << m.auc << ", AP " << m.ap << ", " << run.seconds
        << " s end to end";
    report(1, m.auc >= 0.95 && m.ap >= 0.95 && run.seconds < 300.0,
           msg.str());
  }
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7(run, root);
  criterion_8(run);
  {
    const PipelineRun rerun = run_pipeline(root / "run2");
    const bool ok = slurp(run.metrics_path) == slurp(rerun.metrics_path) &&
                    !slurp(run.metrics_path).empty();
    report(9, ok, ok ? "rerun metrics byte-identical"
                     : "rerun metrics differ");
  }

  std::error_code ec;
  fs::remove_all(root, ec);
  if (g_failures > 0) {
    std::printf("%d criteria failed\n", g_failures);
    return 1;
  }
  std::printf("all 9 criteria passed\n");
  return 0;
}
