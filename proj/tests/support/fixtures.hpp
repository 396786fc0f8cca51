#ifndef CAFM_TEST_FIXTURES_HPP
#define CAFM_TEST_FIXTURES_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace cafm::support {

inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(CAFM_FIXTURE_DIR) / rel; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Drops all whitespace; for comparing documents that differ only in layout.
inline std::string squeeze(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c != ' ' && c != '\n' && c != '\t' && c != '\r') out += c;
  }
  return out;
}

}  // namespace cafm::support

#endif  // CAFM_TEST_FIXTURES_HPP
