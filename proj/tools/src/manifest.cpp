#include "swtex_cli/manifest.hpp"

#include <fstream>
#include <sstream>

#include "swtex/errors.hpp"

namespace swtex::cli {

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) {
  std::ostringstream os;
  os.precision(10);
  os << value;
  set(key, os.str());
}

std::optional<std::string> Manifest::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void Manifest::add_config(const RunConfig& cfg) {
  std::istringstream in(serialize_config(cfg));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    set("config." + line.substr(0, eq), line.substr(eq + 3));
  }
}

std::string Manifest::str() const {
  std::ostringstream os;
  for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
  return os.str();
}

void Manifest::write(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << "# swtex run manifest; replay with: swtex <command> --config <this file>\n" << str();
}

Manifest Manifest::read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read manifest: " + path.string());
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) {
      const auto bare = line.find(" =");
      if (bare != std::string::npos && bare + 2 == line.size()) m.set(line.substr(0, bare), "");
      continue;
    }
    m.set(line.substr(0, eq), line.substr(eq + 3));
  }
  return m;
}

}  // namespace swtex::cli
