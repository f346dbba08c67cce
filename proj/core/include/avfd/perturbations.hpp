#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "avfd/image.hpp"
#include "avfd/manifest.hpp"

namespace avfd {

enum class CorruptionKind { kBlur, kCompress, kInvert, kNoise, kPixelation, kResize };

std::string to_string(CorruptionKind kind);

/// One frame-level corruption. Defaults: quality 20, scale 0.5, ksize 5,
/// sigma 25, block 10.
struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kBlur;
  int ksize = 5;        // blur: odd kernel size >= 1
  int quality = 20;     // compress: JPEG quality in [0, 100]
  double sigma = 25.0;  // noise: Gaussian std per channel
  int block = 10;       // pixelation: block size in {2, 4, 8, 10, 16}
  double scale = 0.5;   // resize: downscale factor in (0, 1]
  std::uint64_t seed = 0;  // noise only

  /// Parses the CLI form, e.g. `noise:sigma=25,seed=7`; omitted parameters
  /// keep the defaults above.
  static CorruptionSpec parse(const std::string& text);
  std::string describe() const;
  void validate() const;
};

/// Applies one corruption; output has the same shape and 8-bit range.
Image apply_corruption(const Image& frame, const CorruptionSpec& spec);

/// Corrupts every frame and mouth crop of every record into `out_root`,
/// leaving audio untouched, and returns a manifest for the corrupted copy
/// (written to out_root / "manifest.avfd").
DatasetManifest corrupt_dataset(const DatasetManifest& manifest,
                                const std::filesystem::path& base_dir,
                                const CorruptionSpec& spec,
                                const std::filesystem::path& out_root);

}  // namespace avfd
