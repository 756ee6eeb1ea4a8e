#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "mosaic/error.hpp"
#include "mosaic/features.hpp"

namespace mosaic {

void write_feature_dump(std::ostream& out, const FeatureSet& fs) {
  out << "# features " << (fs.kind == DescriptorKind::Float128 ? "float128" : "binary256") << ' '
      << fs.size() << '\n';
  char buf[160];
  for (std::size_t i = 0; i < fs.size(); ++i) {
    const Keypoint& k = fs.keypoints[i];
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g %.9g %.9g %d", k.x, k.y, k.scale,
                  k.orientation, k.response, k.octave);
    out << buf << " |";
    if (fs.kind == DescriptorKind::Binary256) {
      out << ' ';
      for (std::uint64_t word : fs.binary_descriptors[i]) {
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(word));
        out << buf;
      }
    } else {
      for (float v : fs.float_descriptor(i)) {
        std::snprintf(buf, sizeof(buf), " %.9g", v);
        out << buf;
      }
    }
    out << '\n';
  }
}

FeatureSet read_feature_dump(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "feature dump: missing header");
  std::istringstream head(line);
  std::string hash, tag, kind;
  std::size_t count = 0;
  if (!(head >> hash >> tag >> kind >> count) || hash != "#" || tag != "features") {
    throw Error(ErrorKind::ParseError, "feature dump: malformed header");
  }
  FeatureSet fs;
  if (kind == "float128") {
    fs.kind = DescriptorKind::Float128;
  } else if (kind == "binary256") {
    fs.kind = DescriptorKind::Binary256;
  } else {
    throw Error(ErrorKind::ParseError, "feature dump: unknown descriptor kind " + kind);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "feature dump: truncated");
    std::istringstream row(line);
    Keypoint k;
    std::string bar;
    if (!(row >> k.x >> k.y >> k.scale >> k.orientation >> k.response >> k.octave >> bar) ||
        bar != "|") {
      throw Error(ErrorKind::ParseError, "feature dump: bad keypoint on line " + std::to_string(i + 2));
    }
    fs.keypoints.push_back(k);
    if (fs.kind == DescriptorKind::Binary256) {
      std::string hex;
      if (!(row >> hex) || hex.size() != 64) {
        throw Error(ErrorKind::ParseError, "feature dump: bad binary descriptor");
      }
      BinaryDescriptor d{};
      for (int w = 0; w < 4; ++w) d[static_cast<std::size_t>(w)] = std::stoull(hex.substr(16 * w, 16), nullptr, 16);
      fs.binary_descriptors.push_back(d);
    } else {
      for (int j = 0; j < 128; ++j) {
        float v;
        if (!(row >> v)) throw Error(ErrorKind::ParseError, "feature dump: short float descriptor");
        fs.float_descriptors.push_back(v);
      }
    }
  }
  return fs;
}

}  // namespace mosaic
