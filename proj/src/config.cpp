#include "mosaic/config.hpp"

#include <algorithm>
#include <charconv>
#include <string>

#include "mosaic/error.hpp"
#include "mosaic/io.hpp"

namespace mosaic {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string normalize_key(std::string_view key) {
  std::string k(key);
  std::replace(k.begin(), k.end(), '_', '-');
  std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
  return k;
}

template <typename T>
T parse_number(std::string_view key, std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw Error(ErrorKind::ParseError, "invalid value '" + std::string(v) + "' for " + std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  const std::string s = normalize_key(v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw Error(ErrorKind::ParseError, "invalid boolean '" + std::string(v) + "' for " + std::string(key));
}

}  // namespace

void apply_setting(PipelineConfig& cfg, std::string_view key_in, std::string_view value) {
  const std::string key = normalize_key(key_in);
  if (key == "detector") {
    const std::string d = normalize_key(value);
    if (d == "sift") {
      cfg.detector = DetectorKind::Sift;
    } else if (d == "orb") {
      cfg.detector = DetectorKind::Orb;
    } else {
      throw Error(ErrorKind::ParseError, "unknown detector '" + std::string(value) + "'");
    }
  } else if (key == "scale") {
    cfg.scale = parse_number<double>(key, value);
  } else if (key == "ratio") {
    cfg.ratio = parse_number<double>(key, value);
  } else if (key == "ransac-thresh") {
    cfg.ransac.threshold = parse_number<double>(key, value);
  } else if (key == "ransac-iters") {
    cfg.ransac.max_iterations = parse_number<int>(key, value);
  } else if (key == "ransac-confidence") {
    cfg.ransac.confidence = parse_number<double>(key, value);
  } else if (key == "min-inliers") {
    cfg.ransac.min_inliers = parse_number<int>(key, value);
  } else if (key == "roi-factor") {
    cfg.roi_factor = parse_number<double>(key, value);
  } else if (key == "feather") {
    cfg.feather_radius = parse_number<double>(key, value);
  } else if (key == "edge-boost") {
    cfg.edge_boost = parse_number<double>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "snapshot-every") {
    cfg.snapshot_every = parse_number<int>(key, value);
  } else if (key == "canvas-limit") {
    cfg.canvas_limit = parse_number<int>(key, value);
  } else if (key == "cross-check") {
    cfg.cross_check = parse_bool(key, value);
  } else if (key == "roi") {
    cfg.use_roi = parse_bool(key, value);
  } else if (key == "no-roi") {
    cfg.use_roi = !parse_bool(key, value);
  } else if (key == "blend") {
    cfg.blend = parse_bool(key, value);
  } else if (key == "no-blend") {
    cfg.blend = !parse_bool(key, value);
  } else {
    throw Error(ErrorKind::UnknownKey, "unknown key '" + std::string(key_in) + "'");
  }
}

PipelineConfig parse_config(std::string_view text, PipelineConfig base) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw Error(ErrorKind::ParseError, where + "expected key=value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw Error(ErrorKind::ParseError, where + "missing key");
    try {
      apply_setting(base, key, value);
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    }
  }
  return base;
}

PipelineConfig load_config_file(const std::string& path, PipelineConfig base) {
  const Bytes bytes = read_file(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), base);
}

}  // namespace mosaic
