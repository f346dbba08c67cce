#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <tuple>

#include "avfd/types.hpp"

namespace avfd {

/// Manifest file format: UTF-8, header line `avfd-manifest v1`, optional
/// `meta {json}` line, then one JSON record per line with fields named as in
/// SampleRecord. Enum values are lowercase exact strings.

/// Loads and validates a manifest. Local file references are checked for
/// existence (relative paths resolve against the manifest's directory);
/// URL references are accepted as-is.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Parse-only variant used by tooling that writes referenced files later.
DatasetManifest load_manifest(const std::filesystem::path& path,
                              bool check_references);

void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& path);

/// Throws ValidationError on duplicate ids, empty/unequal frame and mouth
/// sequences, or a fake record in the train split.
void validate_manifest(const DatasetManifest& manifest);

using SplitCountKey = std::tuple<Split, Label, Scenario>;

/// Counts records per (split, label, scenario); absent combinations are
/// simply missing from the map.
std::map<SplitCountKey, std::size_t> split_counts(
    const DatasetManifest& manifest);

}  // namespace avfd
