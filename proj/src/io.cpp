#include "ifb/io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ifb {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::runtime_error(msg);
}

// Skips whitespace and '#' comment lines in a PGM header.
int next_header_int(std::istream& in) {
  while (in) {
    int c = in.peek();
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v;
  in >> v;
  require(static_cast<bool>(in), "pgm: malformed header");
  return v;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ImageGrid read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.is_open(), "pgm: cannot open " + path);
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  require(magic == "P5", "pgm: not a binary P5 file: " + path);
  int w = next_header_int(in);
  int h = next_header_int(in);
  int maxval = next_header_int(in);
  require(w > 0 && h > 0 && (maxval == 255 || maxval == 65535),
          "pgm: unsupported dimensions or maxval");
  in.get();  // single whitespace after maxval
  ImageGrid img;
  img.width = w;
  img.height = h;
  img.pixels.resize(static_cast<Index>(w) * h);
  const Index n = img.pixels.size();
  if (maxval == 255) {
    std::vector<unsigned char> buf(n);
    in.read(reinterpret_cast<char*>(buf.data()), n);
    require(static_cast<bool>(in), "pgm: truncated pixel data");
    for (Index i = 0; i < n; ++i) img.pixels[i] = buf[i] / 255.0;
  } else {
    std::vector<unsigned char> buf(2 * n);
    in.read(reinterpret_cast<char*>(buf.data()), 2 * n);
    require(static_cast<bool>(in), "pgm: truncated pixel data");
    for (Index i = 0; i < n; ++i) {
      unsigned v = (static_cast<unsigned>(buf[2 * i]) << 8) | buf[2 * i + 1];  // big-endian
      img.pixels[i] = v / 65535.0;
    }
  }
  return img;
}

void write_pgm(const std::string& path, const ImageGrid& img, int maxval) {
  require(maxval == 255 || maxval == 65535, "pgm: maxval must be 255 or 65535");
  std::ofstream out(path, std::ios::binary);
  require(out.is_open(), "pgm: cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
  const Index n = img.pixels.size();
  auto quant = [&](double v) {
    double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned>(c * maxval + 0.5);
  };
  if (maxval == 255) {
    std::vector<unsigned char> buf(n);
    for (Index i = 0; i < n; ++i) buf[i] = static_cast<unsigned char>(quant(img.pixels[i]));
    out.write(reinterpret_cast<const char*>(buf.data()), n);
  } else {
    std::vector<unsigned char> buf(2 * n);
    for (Index i = 0; i < n; ++i) {
      unsigned v = quant(img.pixels[i]);
      buf[2 * i] = static_cast<unsigned char>(v >> 8);
      buf[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), 2 * n);
  }
  require(static_cast<bool>(out), "pgm: write failed for " + path);
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', "config: unterminated section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    require(eq != std::string::npos, "config: expected key=value at line " + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    require(!key.empty(), "config: empty key at line " + std::to_string(lineno));
    if (!section.empty()) key = section + "." + key;
    cfg[key] = val;
  }
  return cfg;
}

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  require(in.is_open(), "config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace ifb
