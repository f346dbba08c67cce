#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "avfd/errors.hpp"

namespace avfd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Label { kReal, kFake };
enum class Scenario { kTalking, kSinging };
enum class Split { kTrain, kVal, kTest };

std::string to_string(Label v);
std::string to_string(Scenario v);
std::string to_string(Split v);
Label label_from_string(const std::string& s);
Scenario scenario_from_string(const std::string& s);
Split split_from_string(const std::string& s);

/// One labeled audio-visual clip. Frames and mouth crops are referenced by
/// path (or URL), never embedded.
struct SampleRecord {
  std::string id;
  std::vector<std::string> frame_refs;
  std::vector<std::string> mouth_refs;
  std::string audio_ref;
  int sample_rate_hz = 16000;
  double fps = 25.0;                    // video frame rate; manifest metadata
  std::optional<std::string> mask_ref;
  Label label = Label::kReal;
  Scenario scenario = Scenario::kTalking;
  Split split = Split::kTrain;

  bool operator==(const SampleRecord&) const = default;
};

struct DatasetManifest {
  std::string name;
  std::string version;
  std::vector<SampleRecord> records;

  bool operator==(const DatasetManifest&) const = default;
};

/// Per-clip extracted features: face semantic f (unit norm), per-frame
/// visual rows v_t and audio rows a_t, all in the shared d-dim space.
struct FeatureBundle {
  Vector face;    // d
  Matrix visual;  // T x d
  Matrix audio;   // T x d

  Eigen::Index dim() const { return face.size(); }
  Eigen::Index frames() const { return visual.rows(); }
};

}  // namespace avfd
