#include "avfd/perturbations.hpp"

#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <random>
#include <sstream>
#include <vector>

#include "avfd/errors.hpp"
#include "avfd/rng.hpp"

namespace avfd {

namespace {

int reflect(int idx, int size) {
  while (idx < 0 || idx >= size) {
    if (idx < 0) idx = -idx - 1;
    if (idx >= size) idx = 2 * size - idx - 1;
  }
  return idx;
}

std::uint8_t clamp_round(double v) {
  return static_cast<std::uint8_t>(std::clamp<long>(std::lround(v), 0, 255));
}

Image blur(const Image& img, int ksize) {
  const double sigma = 0.3 * ((ksize - 1) * 0.5 - 1.0) + 0.8;
  const int half = ksize / 2;
  std::vector<double> kernel(static_cast<std::size_t>(ksize));
  double sum = 0.0;
  for (int i = 0; i < ksize; ++i) {
    const double x = i - half;
    kernel[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += kernel[i];
  }
  for (double& k : kernel) k /= sum;

  // Separable convolution with reflect padding, rounded once at the end.
  std::vector<double> tmp(img.data.size());
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int i = 0; i < ksize; ++i) {
          acc += kernel[i] * img.at(y, reflect(x + i - half, img.width), c);
        }
        tmp[(static_cast<std::size_t>(y) * img.width + x) * img.channels + c] =
            acc;
      }
    }
  }
  Image out(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        double acc = 0.0;
        for (int i = 0; i < ksize; ++i) {
          const int yy = reflect(y + i - half, img.height);
          acc += kernel[i] *
                 tmp[(static_cast<std::size_t>(yy) * img.width + x) *
                         img.channels + c];
        }
        out.at(y, x, c) = clamp_round(acc);
      }
    }
  }
  return out;
}

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(mgr->jump, 1);
}

Image jpeg_roundtrip(const Image& img, int quality) {
  // Encode to memory.
  jpeg_compress_struct cinfo;
  JpegErrorMgr err;
  cinfo.err = jpeg_std_error(&err.pub);
  err.pub.error_exit = jpeg_error_exit;
  unsigned char* buffer = nullptr;
  unsigned long buffer_size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    if (buffer) free(buffer);
    throw NumericError("JPEG encode failed");
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &buffer, &buffer_size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = img.channels;
  cinfo.in_color_space = img.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<JSAMPLE> row(static_cast<std::size_t>(img.width) * img.channels);
  while (cinfo.next_scanline < cinfo.image_height) {
    const auto* src = img.data.data() +
                      static_cast<std::size_t>(cinfo.next_scanline) *
                          img.width * img.channels;
    std::copy(src, src + row.size(), row.data());
    JSAMPROW row_ptr = row.data();
    jpeg_write_scanlines(&cinfo, &row_ptr, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);

  // Decode back.
  jpeg_decompress_struct dinfo;
  JpegErrorMgr derr;
  dinfo.err = jpeg_std_error(&derr.pub);
  derr.pub.error_exit = jpeg_error_exit;
  if (setjmp(derr.jump)) {
    jpeg_destroy_decompress(&dinfo);
    free(buffer);
    throw NumericError("JPEG decode failed");
  }
  jpeg_create_decompress(&dinfo);
  jpeg_mem_src(&dinfo, buffer, buffer_size);
  jpeg_read_header(&dinfo, TRUE);
  dinfo.out_color_space = img.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&dinfo);
  Image out(img.width, img.height, img.channels);
  while (dinfo.output_scanline < dinfo.output_height) {
    JSAMPROW row_ptr = out.data.data() +
                       static_cast<std::size_t>(dinfo.output_scanline) *
                           img.width * img.channels;
    jpeg_read_scanlines(&dinfo, &row_ptr, 1);
  }
  jpeg_finish_decompress(&dinfo);
  jpeg_destroy_decompress(&dinfo);
  free(buffer);
  return out;
}

Image invert(const Image& img) {
  Image out = img;
  for (auto& p : out.data) p = static_cast<std::uint8_t>(255 - p);
  return out;
}

Image add_noise(const Image& img, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  Image out(img.width, img.height, img.channels);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = clamp_round(img.data[i] + dist(rng));
  }
  return out;
}

Image pixelate(const Image& img, int block) {
  Image out(img.width, img.height, img.channels);
  for (int y0 = 0; y0 < img.height; y0 += block) {
    const int y1 = std::min(y0 + block, img.height);
    for (int x0 = 0; x0 < img.width; x0 += block) {
      const int x1 = std::min(x0 + block, img.width);
      for (int c = 0; c < img.channels; ++c) {
        double sum = 0.0;
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) sum += img.at(y, x, c);
        }
        const auto mean_floor = static_cast<std::uint8_t>(
            std::floor(sum / ((y1 - y0) * (x1 - x0))));
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) out.at(y, x, c) = mean_floor;
        }
      }
    }
  }
  return out;
}

// Center-aligned bilinear sampling; exact identity when sizes match.
Image bilinear_resize(const Image& img, int new_w, int new_h) {
  Image out(new_w, new_h, img.channels);
  const double sx = static_cast<double>(img.width) / new_w;
  const double sy = static_cast<double>(img.height) / new_h;
  for (int y = 0; y < new_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int x = 0; x < new_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (int c = 0; c < img.channels; ++c) {
        const double v =
            (1 - wy) * ((1 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c)) +
            wy * ((1 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c));
        out.at(y, x, c) = clamp_round(v);
      }
    }
  }
  return out;
}

Image resize_corruption(const Image& img, double scale) {
  const int dw = std::max(1, static_cast<int>(std::lround(img.width * scale)));
  const int dh = std::max(1, static_cast<int>(std::lround(img.height * scale)));
  return bilinear_resize(bilinear_resize(img, dw, dh), img.width, img.height);
}

}  // namespace

std::string to_string(CorruptionKind kind) {
  switch (kind) {
    case CorruptionKind::kBlur: return "blur";
    case CorruptionKind::kCompress: return "compress";
    case CorruptionKind::kInvert: return "invert";
    case CorruptionKind::kNoise: return "noise";
    case CorruptionKind::kPixelation: return "pixelation";
    default: return "resize";
  }
}

CorruptionSpec CorruptionSpec::parse(const std::string& text) {
  CorruptionSpec spec;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  if (kind == "blur") spec.kind = CorruptionKind::kBlur;
  else if (kind == "compress") spec.kind = CorruptionKind::kCompress;
  else if (kind == "invert") spec.kind = CorruptionKind::kInvert;
  else if (kind == "noise") spec.kind = CorruptionKind::kNoise;
  else if (kind == "pixelation") spec.kind = CorruptionKind::kPixelation;
  else if (kind == "resize") spec.kind = CorruptionKind::kResize;
  else throw InvalidSpec("unknown corruption kind: '" + kind + "'");

  if (colon != std::string::npos) {
    std::istringstream params(text.substr(colon + 1));
    std::string kv;
    while (std::getline(params, kv, ',')) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) {
        throw InvalidSpec("expected key=value in corruption spec: " + kv);
      }
      const std::string key = kv.substr(0, eq);
      const std::string val = kv.substr(eq + 1);
      try {
        if (key == "ksize") spec.ksize = std::stoi(val);
        else if (key == "quality") spec.quality = std::stoi(val);
        else if (key == "sigma") spec.sigma = std::stod(val);
        else if (key == "block") spec.block = std::stoi(val);
        else if (key == "scale") spec.scale = std::stod(val);
        else if (key == "seed") spec.seed = std::stoull(val);
        else throw InvalidSpec("unknown corruption parameter: '" + key + "'");
      } catch (const std::logic_error&) {
        throw InvalidSpec("bad value for " + key + ": '" + val + "'");
      }
    }
  }
  spec.validate();
  return spec;
}

std::string CorruptionSpec::describe() const {
  std::ostringstream out;
  out << to_string(kind);
  switch (kind) {
    case CorruptionKind::kBlur: out << ":ksize=" << ksize; break;
    case CorruptionKind::kCompress: out << ":quality=" << quality; break;
    case CorruptionKind::kInvert: break;
    case CorruptionKind::kNoise:
      out << ":sigma=" << sigma << ",seed=" << seed;
      break;
    case CorruptionKind::kPixelation: out << ":block=" << block; break;
    case CorruptionKind::kResize: out << ":scale=" << scale; break;
  }
  return out.str();
}

void CorruptionSpec::validate() const {
  switch (kind) {
    case CorruptionKind::kBlur:
      if (ksize < 1 || ksize % 2 == 0) {
        throw InvalidSpec("blur ksize must be odd and >= 1");
      }
      break;
    case CorruptionKind::kCompress:
      if (quality < 0 || quality > 100) {
        throw InvalidSpec("compress quality must be in [0, 100]");
      }
      break;
    case CorruptionKind::kNoise:
      if (sigma < 0.0) throw InvalidSpec("noise sigma must be >= 0");
      break;
    case CorruptionKind::kPixelation:
      if (block != 2 && block != 4 && block != 8 && block != 10 &&
          block != 16) {
        throw InvalidSpec("pixelation block must be one of {2,4,8,10,16}");
      }
      break;
    case CorruptionKind::kResize:
      if (!(scale > 0.0 && scale <= 1.0)) {
        throw InvalidSpec("resize scale must be in (0, 1]");
      }
      break;
    case CorruptionKind::kInvert:
      break;
  }
}

Image apply_corruption(const Image& frame, const CorruptionSpec& spec) {
  if (frame.empty()) throw EmptyImage("cannot corrupt empty image");
  switch (spec.kind) {
    case CorruptionKind::kBlur:
      if (spec.ksize < 1 || spec.ksize % 2 == 0) {
        throw InvalidSpec("blur ksize must be odd and >= 1");
      }
      return blur(frame, spec.ksize);
    case CorruptionKind::kCompress:
      if (spec.quality < 0 || spec.quality > 100) {
        throw InvalidSpec("compress quality must be in [0, 100]");
      }
      return jpeg_roundtrip(frame, spec.quality);
    case CorruptionKind::kInvert:
      return invert(frame);
    case CorruptionKind::kNoise:
      if (spec.sigma < 0.0) throw InvalidSpec("noise sigma must be >= 0");
      return add_noise(frame, spec.sigma, spec.seed);
    case CorruptionKind::kPixelation:
      if (spec.block < 1) throw InvalidSpec("pixelation block must be >= 1");
      return pixelate(frame, spec.block);
    case CorruptionKind::kResize:
      if (!(spec.scale > 0.0 && spec.scale <= 1.0)) {
        throw InvalidSpec("resize scale must be in (0, 1]");
      }
      return resize_corruption(frame, spec.scale);
  }
  throw InvalidSpec("unhandled corruption kind");
}

DatasetManifest corrupt_dataset(const DatasetManifest& manifest,
                                const std::filesystem::path& base_dir,
                                const CorruptionSpec& spec,
                                const std::filesystem::path& out_root) {
  namespace fs = std::filesystem;
  fs::create_directories(out_root);

  const auto resolve = [&](const std::string& ref) {
    fs::path p(ref);
    return p.is_relative() ? base_dir / p : p;
  };
  const auto out_rel = [&](const std::string& ref, const std::string& id) {
    fs::path p(ref);
    return p.is_relative() ? p : fs::path(id) / p.filename();
  };

  DatasetManifest out = manifest;
  out.name = manifest.name + "+" + spec.describe();
  for (auto& r : out.records) {
    const auto corrupt_ref = [&](std::string& ref) {
      const fs::path src = resolve(ref);
      const fs::path rel = out_rel(ref, r.id);
      const fs::path dst = out_root / rel;
      fs::create_directories(dst.parent_path());
      CorruptionSpec file_spec = spec;
      // Per-file noise stream, still fully determined by the spec seed.
      file_spec.seed = mix_seed(spec.seed, fnv1a(rel.string()));
      save_pnm(apply_corruption(load_pnm(src), file_spec), dst);
      ref = rel.string();
    };

    for (auto& ref : r.frame_refs) corrupt_ref(ref);
    for (auto& ref : r.mouth_refs) corrupt_ref(ref);

    const auto copy_ref = [&](std::string& ref) {
      const fs::path src = resolve(ref);
      const fs::path rel = out_rel(ref, r.id);
      const fs::path dst = out_root / rel;
      fs::create_directories(dst.parent_path());
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
      ref = rel.string();
    };
    copy_ref(r.audio_ref);
    if (r.mask_ref) {
      std::string m = *r.mask_ref;
      copy_ref(m);
      r.mask_ref = m;
    }
  }
  save_manifest(out, out_root / "manifest.avfd");
  return out;
}

}  // namespace avfd
