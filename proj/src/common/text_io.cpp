// SPDX-License-Identifier: Apache-2.0
#include "common/text_io.hpp"

#include "common/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

namespace floeberg::io {

namespace fs = std::filesystem;

std::string read_file(const fs::path &path) {
  std::error_code ec;
  if (!fs::exists(path, ec) || fs::is_directory(path, ec))
    fail(ErrorKind::MissingInput, "input not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(ErrorKind::MissingInput, "cannot open: " + path.string());
  std::string data;
  in.seekg(0, std::ios::end);
  data.resize(static_cast<std::size_t>(in.tellg()));
  in.seekg(0, std::ios::beg);
  in.read(data.data(), static_cast<std::streamsize>(data.size()));
  if (!in)
    fail(ErrorKind::Io, "read failed: " + path.string());
  return data;
}

namespace {

void write_atomic(const fs::path &path, const char *data, std::size_t size) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      fail(ErrorKind::Io, "cannot create: " + tmp.string());
    out.write(data, static_cast<std::streamsize>(size));
    out.flush();
    if (!out)
      fail(ErrorKind::Io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorKind::Io, "cannot rename into place: " + path.string());
  }
}

} // namespace

void write_file_atomic(const fs::path &path, std::string_view contents) {
  write_atomic(path, contents.data(), contents.size());
}

void write_binary_atomic(const fs::path &path,
                         const std::vector<std::uint8_t> &bytes) {
  write_atomic(path, reinterpret_cast<const char *>(bytes.data()),
               bytes.size());
}

bool LineCursor::next(std::string_view &line) {
  if (pos_ >= text_.size())
    return false;
  std::size_t end = text_.find('\n', pos_);
  if (end == std::string_view::npos)
    end = text_.size();
  line = text_.substr(pos_, end - pos_);
  if (!line.empty() && line.back() == '\r')
    line.remove_suffix(1);
  pos_ = end + 1;
  ++line_no_;
  return true;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

void split_fields(std::string_view line, std::vector<std::string_view> &out,
                  char sep) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    std::size_t end = line.find(sep, start);
    if (end == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return;
    }
    out.push_back(trim(line.substr(start, end - start)));
    start = end + 1;
  }
}

double parse_double(std::string_view s, std::string_view what) {
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    fail(ErrorKind::Parse,
         "bad number for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

std::int64_t parse_int(std::string_view s, std::string_view what) {
  s = trim(s);
  if (!s.empty() && s.front() == '+')
    s.remove_prefix(1);
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    fail(ErrorKind::Parse, "bad integer for " + std::string(what) + ": '" +
                               std::string(s) + "'");
  return v;
}

void append_double(std::string &out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, ptr);
}

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

void append_int(std::string &out, std::int64_t v) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  out.append(buf, ptr);
}

void expect_header(std::string_view line, std::string_view expected,
                   std::string_view file_kind, bool allow_extra) {
  line = trim(line);
  bool ok = line == expected;
  if (!ok && allow_extra)
    ok = line.size() > expected.size() &&
         line.substr(0, expected.size()) == expected &&
         line[expected.size()] == ',';
  if (!ok)
    fail(ErrorKind::Parse, std::string(file_kind) + ": expected header '" +
                               std::string(expected) + "', got '" +
                               std::string(line) + "'");
}

} // namespace floeberg::io
