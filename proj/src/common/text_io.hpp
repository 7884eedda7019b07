// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace floeberg::io {

/// Whole-file read. A missing file raises ErrorKind::MissingInput.
std::string read_file(const std::filesystem::path &path);

/// Writes through a sibling temp file and renames it into place, so readers
/// never observe a half-written product.
void write_file_atomic(const std::filesystem::path &path,
                       std::string_view contents);

void write_binary_atomic(const std::filesystem::path &path,
                         const std::vector<std::uint8_t> &bytes);

/// Iterates '\n'-terminated lines of an in-memory buffer, stripping '\r'.
class LineCursor {
public:
  explicit LineCursor(std::string_view text) : text_(text) {}

  bool next(std::string_view &line);
  std::size_t line_number() const noexcept { return line_no_; }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

/// Unquoted comma-separated fields; surrounding blanks are trimmed.
void split_fields(std::string_view line, std::vector<std::string_view> &out,
                  char sep = ',');

std::string_view trim(std::string_view s);

double parse_double(std::string_view s, std::string_view what);
std::int64_t parse_int(std::string_view s, std::string_view what);

/// Shortest decimal text that parses back to the same double.
void append_double(std::string &out, double v);
std::string format_double(double v);
void append_int(std::string &out, std::int64_t v);

/// Fails with ErrorKind::Parse unless the header line equals `expected`
/// (or, when `allow_extra` is set, starts with it followed by more columns).
void expect_header(std::string_view line, std::string_view expected,
                   std::string_view file_kind, bool allow_extra = false);

} // namespace floeberg::io
