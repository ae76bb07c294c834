#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "ecokin/error.hpp"

namespace ecokin::app {

inline constexpr const char* kVersion = "0.1.0";

/// Reproducibility data written at the top of every output file.
struct Provenance {
  std::string command_line;
  std::uint64_t config_hash = 0;
  std::string seeds;
};

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

inline void write_header(std::ostream& os, const Provenance& prov) {
  os << "# ecokin " << kVersion << "\n"
     << "# config_hash: " << hex64(prov.config_hash) << "\n"
     << "# seeds: " << (prov.seeds.empty() ? "none" : prov.seeds) << "\n"
     << "# command: " << prov.command_line << "\n";
}

/// CSV file with provenance header and a column row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const Provenance& prov, const std::vector<std::string>& columns)
      : path_(path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    os_.open(path, std::ios::out | std::ios::trunc);
    if (!os_) throw Error("cannot write '" + path.string() + "'");
    os_ << std::setprecision(12);
    write_header(os_, prov);
    for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
    os_ << "\n";
  }

  template <class... T>
  void row(const T&... fields) {
    std::size_t i = 0;
    ((os_ << (i++ ? "," : "") << fields), ...);
    os_ << "\n";
  }

  std::ostream& stream() { return os_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream os_;
};

}  // namespace ecokin::app
