#include "avfd/types.hpp"

namespace avfd {

std::string to_string(Label v) { return v == Label::kReal ? "real" : "fake"; }

std::string to_string(Scenario v) {
  return v == Scenario::kTalking ? "talking" : "singing";
}

std::string to_string(Split v) {
  switch (v) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    default: return "test";
  }
}

Label label_from_string(const std::string& s) {
  if (s == "real") return Label::kReal;
  if (s == "fake") return Label::kFake;
  throw ParseError("unknown label: '" + s + "'");
}

Scenario scenario_from_string(const std::string& s) {
  if (s == "talking") return Scenario::kTalking;
  if (s == "singing") return Scenario::kSinging;
  throw ParseError("unknown scenario: '" + s + "'");
}

Split split_from_string(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw ParseError("unknown split: '" + s + "'");
}

}  // namespace avfd
