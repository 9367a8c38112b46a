#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "degctrl/numerics.hpp"

namespace degctrl {

/// Flat structured-text config: one "section.key = value" per line, '#'
/// comments. Values stay strings until queried.
class Config {
public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  Real get_real(const std::string& key, Real fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of reals.
  std::vector<Real> get_list(const std::string& key, const std::vector<Real>& fallback) const;
  /// "auto" (or absence) -> nullopt; otherwise the numeric value.
  std::optional<Real> get_auto(const std::string& key) const;

  void set(const std::string& key, const std::string& value);
  const std::map<std::string, std::string>& entries() const { return entries_; }
  /// Sub-map of keys under "prefix." with the prefix stripped.
  std::map<std::string, std::string> section(const std::string& prefix) const;

private:
  std::map<std::string, std::string> entries_;
};

/// Column-oriented text table with '#'-prefixed metadata lines and one header
/// row naming the columns. %.17g formatting keeps reruns byte-identical.
class TableWriter {
public:
  TableWriter(const std::string& path, const std::vector<std::string>& columns,
              const std::vector<std::string>& meta = {});
  ~TableWriter();
  TableWriter(const TableWriter&) = delete;
  TableWriter& operator=(const TableWriter&) = delete;

  void row(const std::vector<Real>& values);
  void row_mixed(const std::vector<std::string>& values);

private:
  std::FILE* f_ = nullptr;
};

/// Key-value report ("key value" lines with a '#' preamble).
void write_kv_report(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv,
                     const std::string& title);

std::string format_real(Real v);

/// Run manifest: config echo, per-stage status, output index; written to a
/// temp file and renamed so it appears atomically.
struct RunManifest {
  std::string pipeline;
  std::map<std::string, std::string> config_echo;
  std::vector<std::pair<std::string, std::string>> stages; // (stage, status)
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;

  void write(const std::string& path) const;
};

bool ensure_directory(const std::string& path);

} // namespace degctrl
