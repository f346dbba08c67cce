#include "avfd/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numeric>

namespace avfd {

namespace {

using ordered_json = nlohmann::ordered_json;

void require_both_classes(const std::vector<Label>& labels) {
  const bool has_fake =
      std::find(labels.begin(), labels.end(), Label::kFake) != labels.end();
  const bool has_real =
      std::find(labels.begin(), labels.end(), Label::kReal) != labels.end();
  if (!has_fake || !has_real) {
    throw SingleClass("metric needs both real and fake samples");
  }
}

}  // namespace

double aggregate_video_score(const Vector& frame_scores) {
  if (frame_scores.size() == 0) throw EmptySequence("no frame scores");
  if (!frame_scores.allFinite()) throw NonFinite("non-finite frame scores");
  const double mx = frame_scores.maxCoeff();
  return mx + std::log((frame_scores.array() - mx).exp().sum());
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<Label>& labels) {
  if (scores.size() != labels.size()) {
    throw DimensionMismatch("scores/labels size mismatch");
  }
  require_both_classes(labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double ap = 0.0;
  std::size_t positives_seen = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != Label::kFake) continue;
    ++positives_seen;
    ap += static_cast<double>(positives_seen) / static_cast<double>(rank + 1);
  }
  return ap / static_cast<double>(positives_seen);
}

double roc_auc(const std::vector<double>& scores,
               const std::vector<Label>& labels) {
  if (scores.size() != labels.size()) {
    throw DimensionMismatch("scores/labels size mismatch");
  }
  require_both_classes(labels);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });
  // Midranks handle ties: the half-pair convention falls out of the
  // Mann-Whitney identity.
  std::vector<double> rank(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
    i = j + 1;
  }
  double fake_rank_sum = 0.0;
  std::size_t n_fake = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (labels[k] == Label::kFake) {
      fake_rank_sum += rank[k];
      ++n_fake;
    }
  }
  const std::size_t n_real = n - n_fake;
  return (fake_rank_sum -
          0.5 * static_cast<double>(n_fake) * static_cast<double>(n_fake + 1)) /
         (static_cast<double>(n_fake) * static_cast<double>(n_real));
}

double mmd2(const Matrix& x, const Matrix& y, bool unbiased) {
  const auto n = x.rows();
  const auto m = y.rows();
  if (n < 2 || m < 2) throw TooFewSamples("mmd2 needs >= 2 samples per set");
  if (x.cols() != y.cols()) throw DimensionMismatch("feature dims differ");

  Matrix pooled(n + m, x.cols());
  pooled << x, y;
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>((n + m) * (n + m - 1) / 2));
  for (Eigen::Index i = 0; i < pooled.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < pooled.rows(); ++j) {
      dists.push_back((pooled.row(i) - pooled.row(j)).norm());
    }
  }
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2,
                   dists.end());
  double sigma = dists[dists.size() / 2];
  if (sigma <= 0.0) {
    // Degenerate bandwidth: fall back to the smallest positive distance,
    // or report 0 when every point coincides.
    double smallest = 0.0;
    for (const double d : dists) {
      if (d > 0.0 && (smallest == 0.0 || d < smallest)) smallest = d;
    }
    if (smallest == 0.0) return 0.0;
    sigma = smallest;
  }
  const double gamma = 1.0 / (2.0 * sigma * sigma);
  const auto kernel = [&](const auto& a, const auto& b) {
    return std::exp(-gamma * (a - b).squaredNorm());
  };

  double kxx = 0.0, kyy = 0.0, kxy = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (unbiased && i == j) continue;
      kxx += kernel(x.row(i), x.row(j));
    }
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (unbiased && i == j) continue;
      kyy += kernel(y.row(i), y.row(j));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) kxy += kernel(x.row(i), y.row(j));
  }
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  if (unbiased) {
    return kxx / (nn * (nn - 1.0)) + kyy / (mm * (mm - 1.0)) -
           2.0 * kxy / (nn * mm);
  }
  return kxx / (nn * nn) + kyy / (mm * mm) - 2.0 * kxy / (nn * mm);
}

double score_overlap(const std::vector<double>& real_scores,
                     const std::vector<double>& fake_scores, int bins) {
  if (real_scores.empty() || fake_scores.empty()) {
    throw EmptyGroup("score_overlap needs both groups non-empty");
  }
  if (bins < 2) throw InvalidSpec("need at least 2 bins");
  double lo = real_scores[0], hi = real_scores[0];
  for (const double s : real_scores) lo = std::min(lo, s), hi = std::max(hi, s);
  for (const double s : fake_scores) lo = std::min(lo, s), hi = std::max(hi, s);
  if (hi <= lo) return 1.0;  // all scores identical

  const auto histogram = [&](const std::vector<double>& scores) {
    std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
    for (const double s : scores) {
      auto b = static_cast<std::size_t>((s - lo) / (hi - lo) * bins);
      if (b >= h.size()) b = h.size() - 1;
      h[b] += 1.0 / static_cast<double>(scores.size());
    }
    return h;
  };
  const auto hr = histogram(real_scores);
  const auto hf = histogram(fake_scores);
  double overlap = 0.0;
  for (std::size_t b = 0; b < hr.size(); ++b) {
    overlap += std::min(hr[b], hf[b]);
  }
  return overlap;
}

ScoreReport score_sample(const SampleRecord& sample,
                         const std::filesystem::path& base_dir,
                         const ModelState& state,
                         const ToyEncoderSet& encoders,
                         const PolarityEmbeddings& emb) {
  const FeatureBundle bundle = extract_features(
      sample, base_dir, encoders.face, encoders.av, state.proj);

  ScoreReport report;
  report.sample_id = sample.id;
  report.label = sample.label;
  report.scenario = sample.scenario;
  report.u_fp = facial_anomaly(bundle.face, emb);

  const Vector fp = build_pattern(bundle.face, emb);
  const Vector v_mean = bundle.visual.colwise().mean().transpose();
  const Vector a_mean = bundle.audio.colwise().mean().transpose();
  const Vector w_hat = generate_weights(state.gen, fp, v_mean, a_mean);
  report.weights = modulate(w_hat, ModulationVector{state.hyper.alpha});

  const AlignmentMatrix am = alignment_matrix(
      bundle.visual, bundle.audio, state.hyper.tau_av, state.hyper.window);
  report.frame_scores = frame_scores(am, report.u_fp, report.weights);
  report.video_score = aggregate_video_score(report.frame_scores);

  Vector r, c;
  alignment_channels(am, &r, &c);
  report.channel_feature = (Vector(3) << report.weights(0) * report.u_fp,
                            report.weights(1) * r.mean(),
                            report.weights(2) * c.mean())
                               .finished();
  return report;
}

EvaluationResult evaluate(const DatasetManifest& manifest,
                          const std::filesystem::path& base_dir,
                          const ModelState& state,
                          const ToyEncoderSet& encoders) {
  const PolarityEmbeddings emb = encode_polarity(
      state.prompts, encoders.text, state.W, state.hyper.tau);

  EvaluationResult result;
  for (const auto& r : manifest.records) {
    if (r.split != Split::kTest) continue;
    result.reports.push_back(score_sample(r, base_dir, state, encoders, emb));
  }
  // Deterministic ordered fold regardless of manifest order.
  std::sort(result.reports.begin(), result.reports.end(),
            [](const ScoreReport& a, const ScoreReport& b) {
              return a.sample_id < b.sample_id;
            });

  const auto reduce = [&](const std::string& key, auto&& filter) {
    std::vector<double> scores;
    std::vector<Label> labels;
    GroupMetrics gm;
    for (const auto& rep : result.reports) {
      if (!filter(rep)) continue;
      scores.push_back(rep.video_score);
      labels.push_back(rep.label);
      if (rep.label == Label::kReal) ++gm.n_real; else ++gm.n_fake;
    }
    if (scores.empty()) return;
    if (gm.n_real > 0 && gm.n_fake > 0) {
      gm.ap = average_precision(scores, labels);
      gm.auc = roc_auc(scores, labels);
    }
    result.metrics[key] = gm;
  };

  reduce("all", [](const ScoreReport&) { return true; });
  reduce("talking", [](const ScoreReport& r) {
    return r.scenario == Scenario::kTalking;
  });
  reduce("singing", [](const ScoreReport& r) {
    return r.scenario == Scenario::kSinging;
  });

  if (result.metrics.empty() || result.metrics.at("all").n_real == 0 ||
      result.metrics.at("all").n_fake == 0) {
    throw SingleClass("test split needs both real and fake samples");
  }
  return result;
}

namespace {

ordered_json report_to_json(const ScoreReport& r) {
  ordered_json j;
  j["sample_id"] = r.sample_id;
  j["label"] = to_string(r.label);
  j["scenario"] = to_string(r.scenario);
  j["video_score"] = r.video_score;
  j["u_fp"] = r.u_fp;
  j["weights"] = std::vector<double>(r.weights.data(),
                                     r.weights.data() + r.weights.size());
  j["frame_scores"] = std::vector<double>(
      r.frame_scores.data(), r.frame_scores.data() + r.frame_scores.size());
  j["channel_feature"] =
      std::vector<double>(r.channel_feature.data(),
                          r.channel_feature.data() + r.channel_feature.size());
  return j;
}

Vector json_to_vector(const ordered_json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void write_score_reports(const std::vector<ScoreReport>& reports,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write reports: " + path.string());
  for (const auto& r : reports) out << report_to_json(r).dump() << "\n";
}

std::vector<ScoreReport> load_score_reports(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open reports: " + path.string());
  std::vector<ScoreReport> reports;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = ordered_json::parse(line);
    ScoreReport r;
    r.sample_id = j.at("sample_id").get<std::string>();
    r.label = label_from_string(j.at("label").get<std::string>());
    r.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    r.video_score = j.at("video_score").get<double>();
    r.u_fp = j.at("u_fp").get<double>();
    r.weights = json_to_vector(j.at("weights"));
    r.frame_scores = json_to_vector(j.at("frame_scores"));
    r.channel_feature = json_to_vector(j.at("channel_feature"));
    reports.push_back(std::move(r));
  }
  return reports;
}

void write_metrics_table(const EvaluationResult& result, std::ostream& out) {
  out << std::left << std::setw(10) << "group" << std::right << std::setw(10)
      << "AP" << std::setw(10) << "AUC" << std::setw(8) << "real"
      << std::setw(8) << "fake" << "\n";
  for (const auto& [name, gm] : result.metrics) {
    out << std::left << std::setw(10) << name << std::right << std::fixed
        << std::setprecision(4) << std::setw(10);
    if (gm.n_real > 0 && gm.n_fake > 0) {
      out << gm.ap << std::setw(10) << gm.auc;
    } else {
      out << "-" << std::setw(10) << "-";
    }
    out << std::setw(8) << gm.n_real << std::setw(8) << gm.n_fake << "\n";
    out.unsetf(std::ios::fixed);
  }
}

void write_metrics_record(const EvaluationResult& result,
                          const std::filesystem::path& path) {
  ordered_json j;
  for (const auto& [name, gm] : result.metrics) {
    ordered_json g;
    if (gm.n_real > 0 && gm.n_fake > 0) {
      g["ap"] = gm.ap;
      g["auc"] = gm.auc;
    }
    g["n_real"] = gm.n_real;
    g["n_fake"] = gm.n_fake;
    j[name] = g;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write metrics: " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace avfd
