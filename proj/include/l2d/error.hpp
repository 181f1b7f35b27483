#pragma once

#include <stdexcept>
#include <string>

namespace l2d {

// Every failure the library raises carries one of these codes so callers
// (and the CLI exit-code mapping) can tell usage, data and io problems apart.
enum class Errc {
  invalid_argument,
  dim_mismatch,
  duplicate_sample,
  bad_record,
  empty_memory,
  io,
  bad_magic,
  bad_version,
  truncated,
  checksum_mismatch,
  bad_format,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::dim_mismatch: return "dim_mismatch";
    case Errc::duplicate_sample: return "duplicate_sample";
    case Errc::bad_record: return "bad_record";
    case Errc::empty_memory: return "empty_memory";
    case Errc::io: return "io";
    case Errc::bad_magic: return "bad_magic";
    case Errc::bad_version: return "bad_version";
    case Errc::truncated: return "truncated";
    case Errc::checksum_mismatch: return "checksum_mismatch";
    case Errc::bad_format: return "bad_format";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace l2d
