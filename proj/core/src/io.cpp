#include "degctrl/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <sys/stat.h>

#include "degctrl/errors.hpp"

namespace degctrl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

} // namespace

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorKind::configuration,
           "config line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      fail(ErrorKind::configuration, "config line " + std::to_string(lineno) + ": empty key");
    c.entries_[key] = value;
  }
  return c;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::get(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

Real Config::get_real(const std::string& key, Real fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const Real v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::configuration, "config key '" + key + "': '" + it->second + "' is not a number");
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::configuration, "config key '" + key + "': '" + it->second + "' is not an integer");
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorKind::configuration, "config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<Real> Config::get_list(const std::string& key, const std::vector<Real>& fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  std::vector<Real> out;
  std::istringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      fail(ErrorKind::configuration, "config key '" + key + "': '" + item + "' is not a number");
    }
  }
  if (out.empty())
    fail(ErrorKind::configuration, "config key '" + key + "': empty list");
  return out;
}

std::optional<Real> Config::get_auto(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end() || it->second == "auto") return std::nullopt;
  return get_real(key, 0.0);
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = value; }

std::map<std::string, std::string> Config::section(const std::string& prefix) const {
  std::map<std::string, std::string> out;
  const std::string p = prefix + ".";
  for (const auto& [k, v] : entries_)
    if (k.rfind(p, 0) == 0) out[k.substr(p.size())] = v;
  return out;
}

std::string format_real(Real v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

TableWriter::TableWriter(const std::string& path, const std::vector<std::string>& columns,
                         const std::vector<std::string>& meta) {
  f_ = std::fopen(path.c_str(), "w");
  if (!f_) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  for (const auto& m : meta) std::fprintf(f_, "# %s\n", m.c_str());
  for (std::size_t i = 0; i < columns.size(); ++i)
    std::fprintf(f_, "%s%s", columns[i].c_str(), i + 1 == columns.size() ? "\n" : " ");
}

TableWriter::~TableWriter() {
  if (f_) std::fclose(f_);
}

void TableWriter::row(const std::vector<Real>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    std::fprintf(f_, "%.17g%s", values[i], i + 1 == values.size() ? "\n" : " ");
}

void TableWriter::row_mixed(const std::vector<std::string>& values) {
  for (std::size_t i = 0; i < values.size(); ++i)
    std::fprintf(f_, "%s%s", values[i].c_str(), i + 1 == values.size() ? "\n" : " ");
}

void write_kv_report(const std::string& path, const std::vector<std::pair<std::string, std::string>>& kv,
                     const std::string& title) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) fail(ErrorKind::io, "cannot open '" + path + "' for writing");
  std::fprintf(f, "# %s\n", title.c_str());
  for (const auto& [k, v] : kv) std::fprintf(f, "%s %s\n", k.c_str(), v.c_str());
  std::fclose(f);
}

void RunManifest::write(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::FILE* f = std::fopen(tmp.c_str(), "w");
    if (!f) fail(ErrorKind::io, "cannot open '" + tmp + "' for writing");
    std::fprintf(f, "# run manifest\n");
    std::fprintf(f, "pipeline %s\n", pipeline.c_str());
    std::fprintf(f, "wall_seconds %.3f\n", wall_seconds);
    for (const auto& [k, v] : config_echo) std::fprintf(f, "config.%s %s\n", k.c_str(), v.c_str());
    for (const auto& [k, v] : stages) std::fprintf(f, "stage.%s %s\n", k.c_str(), v.c_str());
    for (const auto& o : outputs) std::fprintf(f, "output %s\n", o.c_str());
    std::fclose(f);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorKind::io, "cannot atomically rename manifest to '" + path + "'");
}

bool ensure_directory(const std::string& path) {
  if (path.empty()) return false;
  std::string partial;
  for (std::size_t i = 0; i < path.size(); ++i) {
    partial += path[i];
    if (path[i] == '/' || i + 1 == path.size()) {
      if (partial == "/" || partial.empty()) continue;
      std::string dir = partial;
      if (dir.back() == '/') dir.pop_back();
      if (dir.empty()) continue;
      struct stat st{};
      if (stat(dir.c_str(), &st) == 0) {
        if (!S_ISDIR(st.st_mode)) return false;
        continue;
      }
      if (mkdir(dir.c_str(), 0755) != 0) return false;
    }
  }
  return true;
}

} // namespace degctrl
