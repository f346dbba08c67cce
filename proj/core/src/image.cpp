#include "avfd/image.hpp"

#include <fstream>
#include <string>

namespace avfd {

namespace {

// Reads one whitespace/comment-delimited token from a PNM header.
std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok += c;
  }
  return tok;
}

}  // namespace

Image load_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());
  const std::string magic = next_token(in);
  int channels;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    throw ParseError("unsupported image magic '" + magic + "' in " +
                     path.string());
  }
  const int w = std::stoi(next_token(in));
  const int h = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (w <= 0 || h <= 0) throw ParseError("bad image size in " + path.string());
  if (maxval != 255) {
    throw ParseError("only maxval 255 supported: " + path.string());
  }
  Image img(w, h, channels);
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
    throw ParseError("truncated image data in " + path.string());
  }
  return img;
}

void save_pnm(const Image& img, const std::filesystem::path& path) {
  if (img.empty()) throw EmptyImage("refusing to save empty image");
  if (img.channels != 1 && img.channels != 3) {
    throw InvalidSpec("PNM supports 1 or 3 channels, got " +
                      std::to_string(img.channels));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + path.string());
  out << (img.channels == 1 ? "P5" : "P6") << "\n"
      << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw IoError("write failure: " + path.string());
}

}  // namespace avfd
