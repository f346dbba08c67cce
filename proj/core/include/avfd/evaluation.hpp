#pragma once

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "avfd/manifest.hpp"
#include "avfd/model.hpp"

namespace avfd {

struct ScoreReport {
  std::string sample_id;
  Vector frame_scores;
  double video_score = 0.0;
  Vector weights;  // (w_fp, w_v, w_a)
  double u_fp = 0.0;
  Vector channel_feature;  // w-weighted channel means, the MMD feature
  Label label = Label::kReal;
  Scenario scenario = Scenario::kTalking;
};

/// Smoothed max: s = log sum_t exp(s_t), shift-stabilized.
double aggregate_video_score(const Vector& frame_scores);

/// Step-wise AP with fake as the positive class. Ties are broken by stable
/// original order after a descending stable sort.
double average_precision(const std::vector<double>& scores,
                         const std::vector<Label>& labels);

/// Rank statistic: fraction of (fake, real) pairs with the fake scored
/// higher; ties count one half. Computed via midranks.
double roc_auc(const std::vector<double>& scores,
               const std::vector<Label>& labels);

/// Squared MMD with a Gaussian kernel, bandwidth from the median pairwise
/// distance over the pooled points. Rows are samples.
double mmd2(const Matrix& x, const Matrix& y, bool unbiased = true);

/// Histogram intersection of the two score lists over `bins` equal-width
/// bins spanning the pooled range.
double score_overlap(const std::vector<double>& real_scores,
                     const std::vector<double>& fake_scores, int bins = 50);

struct GroupMetrics {
  double ap = 0.0;
  double auc = 0.0;
  std::size_t n_real = 0;
  std::size_t n_fake = 0;
};

struct EvaluationResult {
  /// Keyed by scenario name plus "all"; scenarios missing a class are
  /// reported with counts only (ap/auc omitted from serialization).
  std::map<std::string, GroupMetrics> metrics;
  std::vector<ScoreReport> reports;
};

/// Scores one clip with a frozen model snapshot.
ScoreReport score_sample(const SampleRecord& sample,
                         const std::filesystem::path& base_dir,
                         const ModelState& state,
                         const ToyEncoderSet& encoders,
                         const PolarityEmbeddings& emb);

/// Scores every test-split record and reduces metrics in id order.
EvaluationResult evaluate(const DatasetManifest& manifest,
                          const std::filesystem::path& base_dir,
                          const ModelState& state,
                          const ToyEncoderSet& encoders);

void write_score_reports(const std::vector<ScoreReport>& reports,
                         const std::filesystem::path& path);
std::vector<ScoreReport> load_score_reports(
    const std::filesystem::path& path);

void write_metrics_table(const EvaluationResult& result, std::ostream& out);
void write_metrics_record(const EvaluationResult& result,
                          const std::filesystem::path& path);

}  // namespace avfd
