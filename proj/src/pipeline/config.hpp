// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace floeberg::pipeline {

enum class ValueKind { Text, Path, Real, Integer, Boolean };

struct KeySpec {
  std::string_view key;
  ValueKind kind;
  std::string_view default_value;
  std::string_view help;
};

/// Every recognized configuration key with its default.
const std::vector<KeySpec> &config_keys();

/// Line-oriented "key = value" settings. '#' starts a comment. Values are
/// type-checked on assignment; unknown keys are rejected.
class PipelineConfig {
public:
  PipelineConfig();

  static PipelineConfig parse(std::string_view text);
  static PipelineConfig load(const std::filesystem::path &path);
  /// Applies every assignment of `text` on top of the current values.
  void merge(std::string_view text);

  void set(std::string_view key, std::string_view value);
  bool is_set(std::string_view key) const; // assigned explicitly

  const std::string &text(std::string_view key) const;
  double real(std::string_view key) const;
  std::int64_t integer(std::string_view key) const;
  std::size_t count(std::string_view key) const; // non-negative integer
  bool boolean(std::string_view key) const;
  /// Empty when the key holds an empty string.
  std::optional<std::filesystem::path> path(std::string_view key) const;

  /// Explicit path if set, else `output_dir / fallback_name`.
  std::filesystem::path input_path(std::string_view key,
                                   std::string_view fallback_name) const;
  /// The -o path if set, else `output_dir / default_name`.
  std::filesystem::path output_path(std::string_view default_name) const;

  /// Cross-key range checks (train fraction in (0,1), positive windows...).
  void validate() const;
  /// Effective worker count (the "workers" key, 0 meaning all cores).
  std::size_t workers() const;
  std::uint64_t seed() const;

  std::string to_text() const;

private:
  const KeySpec &spec(std::string_view key) const;
  std::map<std::string, std::string, std::less<>> values_;
  std::set<std::string, std::less<>> explicit_;
};

} // namespace floeberg::pipeline
