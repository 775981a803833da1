#pragma once

#include <stdexcept>
#include <string>

namespace spdelab {

inline constexpr const char* kSchemaVersion = "1";

[[noreturn]] inline void fail_precondition(const std::string& msg) {
  throw std::invalid_argument(msg);
}

[[noreturn]] inline void fail_runtime(const std::string& msg) {
  throw std::runtime_error(msg);
}

}  // namespace spdelab

#define SPDELAB_REQUIRE(cond, msg) \
  do {                             \
    if (!(cond)) ::spdelab::fail_precondition(msg); \
  } while (0)
