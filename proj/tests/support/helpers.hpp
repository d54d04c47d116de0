#pragma once

#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "thermoresp/error.hpp"

namespace testutil {

/// Fresh, empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("thermoresp_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Runs f and returns the error code it throws; fails the test if it does not.
inline std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const thermoresp::Error& e) {
    return std::string(thermoresp::to_string(e.code()));
  }
  ADD_FAILURE() << "expected a thermoresp::Error";
  return "";
}

}  // namespace testutil
