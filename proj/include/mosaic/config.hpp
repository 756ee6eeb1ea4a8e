#pragma once

#include <string>
#include <string_view>

#include "mosaic/pipeline.hpp"

namespace mosaic {

/// Applies one `key=value` setting. Keys use the build flag names without the
/// leading dashes; `_` and `-` are interchangeable. Boolean keys accept
/// true/false, yes/no, on/off, 1/0.
/// Throws UnknownKey naming the key, or ParseError for a bad value.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);

/// Parses `key=value` lines with `#` comments on top of `base`.
/// Parse errors carry the line number.
PipelineConfig parse_config(std::string_view text, PipelineConfig base = {});
PipelineConfig load_config_file(const std::string& path, PipelineConfig base = {});

}  // namespace mosaic
