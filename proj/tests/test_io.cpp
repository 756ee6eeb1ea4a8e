#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>
#include <string>

#include "mosaic/config.hpp"
#include "mosaic/error.hpp"
#include "mosaic/io.hpp"
#include "test_util.hpp"

using namespace mosaic;

namespace {

// Generated with Pillow: 2x2 RGB (255,0,0) (0,255,0) / (0,0,255) (10,20,30),
// 2x2 gray 0 64 / 128 255, and a 16-bit gray image. The interlaced and
// palette variants patch the RGB header and its CRC; the last one flips an IDAT bit.
const std::vector<std::uint8_t> kPilRgb2x2 = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
    0x08, 0x02, 0x00, 0x00, 0x00, 0xfd, 0xd4, 0x9a, 0x73, 0x00, 0x00, 0x00,
    0x16, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xc0,
    0xf0, 0x9f, 0x81, 0x81, 0x81, 0xe1, 0x3f, 0x97, 0x88, 0x1c, 0x00, 0x1a,
    0x58, 0x03, 0x3a, 0x82, 0xe0, 0xab, 0x53, 0x00, 0x00, 0x00, 0x00, 0x49,
    0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
};
const std::vector<std::uint8_t> kPilGray2x2 = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
    0x08, 0x00, 0x00, 0x00, 0x00, 0x57, 0xdd, 0x52, 0xf8, 0x00, 0x00, 0x00,
    0x0e, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0x70, 0x60, 0x68,
    0xf8, 0x0f, 0x00, 0x03, 0x05, 0x01, 0xc0, 0x4e, 0x33, 0x5b, 0xe9, 0x00,
    0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
};
const std::vector<std::uint8_t> kPil16Bit2x2 = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
    0x10, 0x00, 0x00, 0x00, 0x00, 0x07, 0x4d, 0x8e, 0xbb, 0x00, 0x00, 0x00,
    0x12, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0x60, 0x60, 0x60, 0x7e,
    0xc1, 0x50, 0x6a, 0xf0, 0xff, 0x3f, 0x00, 0x0a, 0xf0, 0x03, 0x8f, 0x32,
    0xeb, 0x68, 0xb0, 0x00, 0x00, 0x00, 0x00, 0x49, 0x45, 0x4e, 0x44, 0xae,
    0x42, 0x60, 0x82,
};
const std::vector<std::uint8_t> kInterlaced2x2 = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
    0x08, 0x02, 0x00, 0x00, 0x01, 0x8a, 0xd3, 0xaa, 0xe5, 0x00, 0x00, 0x00,
    0x16, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xc0,
    0xf0, 0x9f, 0x81, 0x81, 0x81, 0xe1, 0x3f, 0x97, 0x88, 0x1c, 0x00, 0x1a,
    0x58, 0x03, 0x3a, 0x82, 0xe0, 0xab, 0x53, 0x00, 0x00, 0x00, 0x00, 0x49,
    0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
};
const std::vector<std::uint8_t> kPalette2x2 = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
    0x08, 0x03, 0x00, 0x00, 0x00, 0x45, 0x68, 0xfd, 0x16, 0x00, 0x00, 0x00,
    0x16, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xcf, 0xc0, 0xc0,
    0xf0, 0x9f, 0x81, 0x81, 0x81, 0xe1, 0x3f, 0x97, 0x88, 0x1c, 0x00, 0x1a,
    0x58, 0x03, 0x3a, 0x82, 0xe0, 0xab, 0x53, 0x00, 0x00, 0x00, 0x00, 0x49,
    0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
};
const std::vector<std::uint8_t> kBadCrc2x2 = {
    0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a, 0x00, 0x00, 0x00, 0x0d,
    0x49, 0x48, 0x44, 0x52, 0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x02,
    0x08, 0x02, 0x00, 0x00, 0x00, 0xfd, 0xd4, 0x9a, 0x73, 0x00, 0x00, 0x00,
    0x16, 0x49, 0x44, 0x41, 0x54, 0x78, 0x9c, 0x63, 0xf8, 0xce, 0xc0, 0xc0,
    0xf0, 0x9f, 0x81, 0x81, 0x81, 0xe1, 0x3f, 0x97, 0x88, 0x1c, 0x00, 0x1a,
    0x58, 0x03, 0x3a, 0x82, 0xe0, 0xab, 0x53, 0x00, 0x00, 0x00, 0x00, 0x49,
    0x45, 0x4e, 0x44, 0xae, 0x42, 0x60, 0x82,
};

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected mosaic::Error");
  return ErrorKind::Io;
}

Bytes as_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

}  // namespace

TEST_CASE("PNM decode") {
  Bytes p5 = as_bytes("P5\n2 1\n255\n");
  p5.push_back(0);
  p5.push_back(255);
  const Image img = decode_pnm(p5);
  CHECK(img.width == 2);
  CHECK(img.height == 1);
  CHECK(img.channels == 1);
  CHECK(img.data == std::vector<std::uint8_t>{0, 255});

  Bytes commented = as_bytes("P6 # comment\n1 # another\n1\n255\n");
  for (std::uint8_t v : {1, 2, 3}) commented.push_back(v);
  CHECK(decode_pnm(commented).data == std::vector<std::uint8_t>{1, 2, 3});

  CHECK(kind_of([] { decode_pnm(as_bytes("P6\n1 1\n65535\n\0\0\0\0\0\0")); }) == ErrorKind::UnsupportedMaxval);
  CHECK(kind_of([] { decode_pnm(as_bytes("P3\n1 1\n255\n1 2 3\n")); }) == ErrorKind::MalformedHeader);
  CHECK(kind_of([] { decode_pnm(as_bytes("P5\n2 2\n255\n\1\2")); }) == ErrorKind::TruncatedData);
  CHECK(kind_of([] { decode_pnm(as_bytes("P5\n0 2\n255\n")); }) == ErrorKind::MalformedHeader);
}

TEST_CASE("PNM encode") {
  const Bytes one = encode_pnm(Image(1, 1, 1, 0));
  const char expected[] = "P5\n1 1\n255\n";
  REQUIRE(one.size() == 12);
  CHECK(std::memcmp(one.data(), expected, 11) == 0);
  CHECK(one[11] == 0);
  const Bytes rgb = encode_pnm(Image(2, 1, 3, 7));
  CHECK(rgb[1] == '6');
  CHECK(rgb.size() == 11 + 6);
}

TEST_CASE("property: codecs round-trip 200 random images") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const int w = 1 + static_cast<int>(rng() % 64), h = 1 + static_cast<int>(rng() % 64);
    const Image img = mosaic::testing::random_image(rng, w, h, rng() % 2 ? 3 : 1);
    CHECK(decode_pnm(encode_pnm(img)) == img);
    CHECK(decode_png(encode_png(img)) == img);
  }
}

TEST_CASE("PNG files from an external encoder") {
  const Image rgb = decode_png(kPilRgb2x2);
  REQUIRE(rgb.channels == 3);
  CHECK(rgb.at(1, 1, 0) == 10);
  CHECK(rgb.at(1, 1, 1) == 20);
  CHECK(rgb.at(1, 1, 2) == 30);
  CHECK(rgb.at(0, 0, 0) == 255);
  CHECK(rgb.at(1, 0, 1) == 255);
  CHECK(rgb.at(0, 1, 2) == 255);
  const Image gray = decode_png(kPilGray2x2);
  CHECK(gray.channels == 1);
  CHECK(gray.data == std::vector<std::uint8_t>{0, 64, 128, 255});
}

TEST_CASE("PNG errors") {
  CHECK(kind_of([] { decode_png(kInterlaced2x2); }) == ErrorKind::UnsupportedPngFeature);
  CHECK(kind_of([] { decode_png(kPalette2x2); }) == ErrorKind::UnsupportedPngFeature);
  CHECK(kind_of([] { decode_png(kPil16Bit2x2); }) == ErrorKind::UnsupportedPngFeature);
  CHECK(kind_of([] { decode_png(kBadCrc2x2); }) == ErrorKind::CorruptPng);
  CHECK(kind_of([] { decode_png(as_bytes("not a png")); }) == ErrorKind::CorruptPng);
  Bytes cut(kPilRgb2x2.begin(), kPilRgb2x2.end() - 12);
  CHECK(kind_of([&] { decode_png(cut); }) == ErrorKind::TruncatedData);
}

TEST_CASE("image files by extension") {
  std::mt19937_64 rng(2);
  const Image img = mosaic::testing::random_image(rng, 9, 7, 3);
  const auto dir = std::filesystem::temp_directory_path() / "mosaic_test_io";
  std::filesystem::create_directories(dir);
  for (const char* name : {"a.ppm", "a.png", "a.pnm"}) {
    const std::string path = (dir / name).string();
    write_image(path, img);
    CHECK(read_image(path) == img);
  }
  CHECK(kind_of([&] { write_image((dir / "a.jpg").string(), img); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { read_image((dir / "missing.ppm").string()); }) == ErrorKind::Io);
  const Bytes mask = encode_mask_pgm(2, 1, std::vector<std::uint8_t>{0, 1});
  CHECK(decode_pnm(mask).data == std::vector<std::uint8_t>{0, 255});
  std::filesystem::remove_all(dir);
}

TEST_CASE("config files") {
  const PipelineConfig defaults;
  const PipelineConfig empty = parse_config("");
  CHECK(empty.ratio == defaults.ratio);
  CHECK(empty.roi_factor == defaults.roi_factor);
  CHECK(empty.detector == defaults.detector);
  CHECK(parse_config("ratio=0.8").ratio == 0.8);

  try {
    parse_config("# comment\nratioo=0.8\n");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownKey);
    CHECK(std::string(e.what()).find("ratioo") != std::string::npos);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  const PipelineConfig c = parse_config(
      "detector = orb\nransac_thresh=2.5\nmin-inliers=12\nno-roi=yes\nblend=off\nedge-boost=0.5\nseed=9\n");
  CHECK(c.detector == DetectorKind::Orb);
  CHECK(c.ransac.threshold == 2.5);
  CHECK(c.ransac.min_inliers == 12);
  CHECK(!c.use_roi);
  CHECK(!c.blend);
  CHECK(c.edge_boost == 0.5);
  CHECK(c.seed == 9);

  CHECK(kind_of([] { parse_config("ratio=abc"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_config("blend=maybe"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_config("detector=surf"); }) == ErrorKind::ParseError);
  CHECK(kind_of([] { parse_config("ratio"); }) == ErrorKind::ParseError);

  PipelineConfig base;
  base.seed = 4;
  CHECK(parse_config("ratio=0.6", base).seed == 4);
}
