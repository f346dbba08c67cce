#include "avfd/manifest.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace avfd {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kHeader = "avfd-manifest v1";

bool is_url(const std::string& ref) {
  return ref.find("://") != std::string::npos;
}

void check_ref(const std::string& ref, const std::filesystem::path& base,
               const std::string& record_id) {
  if (ref.empty() || is_url(ref)) return;
  std::filesystem::path p(ref);
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::exists(p)) {
    throw ValidationError("record '" + record_id +
                          "' references missing file: " + p.string());
  }
}

ordered_json record_to_json(const SampleRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["frame_refs"] = r.frame_refs;
  j["mouth_refs"] = r.mouth_refs;
  j["audio_ref"] = r.audio_ref;
  j["sample_rate_hz"] = r.sample_rate_hz;
  j["fps"] = r.fps;
  if (r.mask_ref) {
    j["mask_ref"] = *r.mask_ref;
  } else {
    j["mask_ref"] = nullptr;
  }
  j["label"] = to_string(r.label);
  j["scenario"] = to_string(r.scenario);
  j["split"] = to_string(r.split);
  return j;
}

SampleRecord record_from_json(const ordered_json& j) {
  SampleRecord r;
  r.id = j.at("id").get<std::string>();
  r.frame_refs = j.at("frame_refs").get<std::vector<std::string>>();
  r.mouth_refs = j.at("mouth_refs").get<std::vector<std::string>>();
  r.audio_ref = j.at("audio_ref").get<std::string>();
  r.sample_rate_hz = j.at("sample_rate_hz").get<int>();
  r.fps = j.at("fps").get<double>();
  if (j.contains("mask_ref") && !j.at("mask_ref").is_null()) {
    r.mask_ref = j.at("mask_ref").get<std::string>();
  }
  r.label = label_from_string(j.at("label").get<std::string>());
  r.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  r.split = split_from_string(j.at("split").get<std::string>());
  return r;
}

}  // namespace

void validate_manifest(const DatasetManifest& manifest) {
  std::set<std::string> ids;
  for (const auto& r : manifest.records) {
    if (r.id.empty()) throw ValidationError("record with empty id");
    if (!ids.insert(r.id).second) {
      throw ValidationError("duplicate record id: '" + r.id + "'");
    }
    if (r.frame_refs.empty()) {
      throw ValidationError("record '" + r.id + "' has no frames");
    }
    if (r.frame_refs.size() != r.mouth_refs.size()) {
      throw ValidationError("record '" + r.id +
                            "': frame_refs and mouth_refs lengths differ");
    }
    if (r.sample_rate_hz <= 0) {
      throw ValidationError("record '" + r.id + "': sample_rate_hz <= 0");
    }
    if (r.fps <= 0.0) {
      throw ValidationError("record '" + r.id + "': fps <= 0");
    }
    // Training uses only authentic samples; enforce at the data boundary.
    if (r.split == Split::kTrain && r.label == Label::kFake) {
      throw ValidationError("fake sample '" + r.id + "' in train split");
    }
  }
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  return load_manifest(path, /*check_references=*/true);
}

DatasetManifest load_manifest(const std::filesystem::path& path,
                              bool check_references) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("empty manifest file: " + path.string());
  }
  if (line != kHeader) {
    throw ParseError("bad manifest header '" + line + "' (expected '" +
                     std::string(kHeader) + "')");
  }

  DatasetManifest m;
  m.name = path.stem().string();
  m.version = "v1";
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      if (line.rfind("meta ", 0) == 0) {
        auto j = ordered_json::parse(line.substr(5));
        if (j.contains("name")) m.name = j.at("name").get<std::string>();
        if (j.contains("version")) m.version = j.at("version").get<std::string>();
        continue;
      }
      m.records.push_back(record_from_json(ordered_json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": " +
                       e.what());
    }
  }

  validate_manifest(m);
  if (check_references) {
    const auto base = path.has_parent_path()
                          ? path.parent_path()
                          : std::filesystem::path(".");
    for (const auto& r : m.records) {
      for (const auto& f : r.frame_refs) check_ref(f, base, r.id);
      for (const auto& f : r.mouth_refs) check_ref(f, base, r.id);
      check_ref(r.audio_ref, base, r.id);
      if (r.mask_ref) check_ref(*r.mask_ref, base, r.id);
    }
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << kHeader << "\n";
  ordered_json meta;
  meta["name"] = manifest.name;
  meta["version"] = manifest.version;
  out << "meta " << meta.dump() << "\n";
  for (const auto& r : manifest.records) {
    out << record_to_json(r).dump() << "\n";
  }
  if (!out) throw IoError("write failure: " + path.string());
}

std::map<SplitCountKey, std::size_t> split_counts(
    const DatasetManifest& manifest) {
  std::map<SplitCountKey, std::size_t> counts;
  for (const auto& r : manifest.records) {
    ++counts[{r.split, r.label, r.scenario}];
  }
  return counts;
}

}  // namespace avfd
