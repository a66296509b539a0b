#pragma once

// Self-check suite run by `vlcshape verify`.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace vlcshape::verify {

struct PropertyResult {
  std::string name;
  bool passed = true;
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  std::string detail;
};

enum class Fault {
  None,
  Golay,  // flips one bit of a Golay generator row before the code checks
};

struct Options {
  std::uint64_t seed = 1;
  Fault fault = Fault::None;
  unsigned threads = 0;
};

std::vector<PropertyResult> run_all(const Options& options);

bool all_passed(const std::vector<PropertyResult>& results);

nlohmann::json to_json(const std::vector<PropertyResult>& results);

}  // namespace vlcshape::verify
