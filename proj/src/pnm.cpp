#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "mosaic/error.hpp"
#include "mosaic/io.hpp"

namespace mosaic {

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> b) : bytes_(b) {}

  // Skips whitespace and '#' comments, then reads a decimal integer.
  long next_number() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorKind::MalformedHeader, "pnm: expected a number in the header");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000'000L) throw Error(ErrorKind::MalformedHeader, "pnm: header value too large");
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorKind::MalformedHeader, "pnm: missing whitespace after maxval");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

std::string extension_of(const std::string& path) {
  std::string ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

}  // namespace

Image decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorKind::MalformedHeader, "pnm: expected binary P5 or P6 magic");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  HeaderReader reader(bytes);
  const long w = reader.next_number();
  const long h = reader.next_number();
  const long maxval = reader.next_number();
  if (w < 1 || h < 1) throw Error(ErrorKind::MalformedHeader, "pnm: zero image dimension");
  if (maxval != 255) {
    throw Error(ErrorKind::UnsupportedMaxval, "pnm: maxval " + std::to_string(maxval) + " unsupported");
  }
  const std::size_t start = reader.raster_start();
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * channels;
  if (bytes.size() < start || bytes.size() - start < need) {
    throw Error(ErrorKind::TruncatedData, "pnm: raster shorter than header promises");
  }
  Image img(static_cast<int>(w), static_cast<int>(h), channels);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), need, img.data.begin());
  return img;
}

Bytes encode_pnm(const Image& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error(ErrorKind::InvalidArgument, "pnm: only 1- or 3-channel images can be encoded");
  }
  const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  Bytes out(header.begin(), header.end());
  out.insert(out.end(), img.data.begin(), img.data.end());
  return out;
}

Bytes encode_mask_pgm(int width, int height, std::span<const std::uint8_t> mask) {
  Image img(width, height, 1);
  for (std::size_t i = 0; i < img.data.size() && i < mask.size(); ++i) img.data[i] = mask[i] ? 255 : 0;
  return encode_pnm(img);
}

Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

void write_text_file(const std::string& path, const std::string& text) {
  write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                                 text.size()));
}

Image read_image(const std::string& path) {
  const std::string ext = extension_of(path);
  const Bytes bytes = read_file(path);
  if (ext == ".png") return decode_png(bytes);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return decode_pnm(bytes);
  throw Error(ErrorKind::InvalidArgument, "unsupported image extension: " + path);
}

void write_image(const std::string& path, const Image& img) {
  const std::string ext = extension_of(path);
  if (ext == ".png") {
    write_file(path, encode_png(img));
  } else if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    write_file(path, encode_pnm(img));
  } else {
    throw Error(ErrorKind::InvalidArgument, "unsupported image extension: " + path);
  }
}

}  // namespace mosaic
