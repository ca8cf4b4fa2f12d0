#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "lobkit/core/error.hpp"

namespace lobkit::io {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::string_view what = "value") {
  double v = 0.0;
  const auto* b = s.data();
  const auto* e = s.data() + s.size();
  const auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc{} || res.ptr != e)
    throw InvalidArgument("cannot parse " + std::string(what) + " '" + std::string(s) + "' as a number");
  return v;
}

inline long long parse_int(std::string_view s, std::string_view what = "value") {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw InvalidArgument("cannot parse " + std::string(what) + " '" + std::string(s) + "' as an integer");
  return v;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

/// A parsed CSV table: a header row and string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw InvalidArgument("missing CSV column '" + std::string(name) + "'");
  }
};

inline Table parse_csv(std::string_view text) {
  Table t;
  std::size_t start = 0;
  bool first = true;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    start = end + 1;
    if (line.empty()) continue;
    auto cells = split(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
    } else {
      if (cells.size() != t.header.size())
        throw InvalidArgument("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(t.header.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes `content` to a sibling temporary file and renames it into place,
/// so readers never observe a partially written file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

/// Incremental CSV text builder.
class CsvWriter {
public:
  explicit CsvWriter(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      if (!first) buf_ += ',';
      buf_ += h;
      first = false;
    }
    buf_ += '\n';
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((append(cells, first)), ...);
    buf_ += '\n';
  }

  const std::string& str() const { return buf_; }

private:
  void sep(bool& first) {
    if (!first) buf_ += ',';
    first = false;
  }
  void append(double v, bool& first) {
    sep(first);
    buf_ += format_double(v);
  }
  void append(const std::string& v, bool& first) {
    sep(first);
    buf_ += v;
  }
  void append(const char* v, bool& first) {
    sep(first);
    buf_ += v;
  }
  template <typename I>
    requires std::is_integral_v<I>
  void append(I v, bool& first) {
    sep(first);
    buf_ += std::to_string(v);
  }

  std::string buf_;
};

}  // namespace lobkit::io
