#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kgsynth/error.hpp"

namespace kgsynth::tsv {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return std::move(buf).str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

// Iterates LF-terminated lines; a missing final LF and CRLF endings are
// tolerated. fn(line_number, line) with 1-based line numbers.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line_no, line);
    pos = end + 1;
  }
}

inline std::vector<std::string_view> split(std::string_view line, char sep = '\t') {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t end = line.find(sep, pos);
    if (end == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
}

// Splits into exactly n fields when the last field may not contain sep
// (returns false on a count mismatch).
inline bool split_exact(std::string_view line, std::size_t n, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t pos = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t end = line.find('\t', pos);
    if (end == std::string_view::npos) return false;
    out.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  const std::string_view rest = line.substr(pos);
  if (rest.find('\t') != std::string_view::npos) return false;
  out.push_back(rest);
  return true;
}

inline bool has_control_separator(std::string_view s) {
  return s.find_first_of("\t\n") != std::string_view::npos;
}

inline std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace kgsynth::tsv
