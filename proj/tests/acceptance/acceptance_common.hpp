// Shared reporting for the acceptance suite: each binary prints exactly one
// line naming the criterion and its verdict.
#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

namespace acceptance {

constexpr int kSkipCode = 77;  // recognized by the test runner as SKIP

inline int report(int index, const std::string& name, bool ok) {
  std::cout << "criterion " << index << " (" << name << "): " << (ok ? "PASS" : "FAIL")
            << std::endl;
  return ok ? 0 : 1;
}

inline int skip(int index, const std::string& name, const std::string& why) {
  std::cout << "criterion " << index << " (" << name << "): SKIP — " << why << std::endl;
  return kSkipCode;
}

// Dataset fixtures live under <repo>/datasets; CELLTOP_DATA_DIR overrides.
inline std::string dataset_dir(const std::string& dataset) {
  if (const char* env = std::getenv("CELLTOP_DATA_DIR"))
    return (std::filesystem::path(env) / dataset).string();
#ifdef CELLTOP_DATASETS_DIR
  return (std::filesystem::path(CELLTOP_DATASETS_DIR) / dataset).string();
#else
  return (std::filesystem::path("datasets") / dataset).string();
#endif
}

inline bool dataset_available(const std::string& dataset) {
  return std::filesystem::exists(std::filesystem::path(dataset_dir(dataset)) / "dataset.json");
}

}  // namespace acceptance
