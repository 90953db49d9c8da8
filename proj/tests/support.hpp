// Shared helpers for the test binaries (no doctest dependency; the acceptance
// runner uses these too).
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#ifndef SEMREP_FIXTURE_DIR
#define SEMREP_FIXTURE_DIR "fixtures"
#endif

namespace testutil {

inline std::string fixture_path(const std::string& name) {
  return std::string(SEMREP_FIXTURE_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::string fixture(const std::string& name) { return read_file(fixture_path(name)); }

}  // namespace testutil
