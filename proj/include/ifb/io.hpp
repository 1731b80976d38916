#pragma once

#include "ifb/imaging.hpp"

#include <map>
#include <string>

namespace ifb {

/// Binary PGM (P5), 8- or 16-bit. Intensities map linearly to [0,1].
ImageGrid read_pgm(const std::string& path);
void write_pgm(const std::string& path, const ImageGrid& img, int maxval = 255);

/// key=value configuration with optional [section] headers ('#' comments).
/// Keys inside a section are flattened to "section.key".
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

}  // namespace ifb
