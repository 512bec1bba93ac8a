#pragma once

#include <stdexcept>
#include <string>

namespace osmp {

enum class Errc {
  kMissingKey,
  kUnitViolation,
  kOrderingViolation,
  kParseError,
  kOverflowShare,
  kNotASleepMode,
  kDegeneratePowers,
  kFsNeverWorthwhile,
  kBufferFillsTooSoon,
  kInvalidState,
  kModelRegime,
  kNoConvergence,
  kAmbiguousClass,
  kConditioningStarved,
  kOracleUnavailable,
  kEventStarvation,
  kUsage,
};

const char* errc_name(Errc code);

// Every failure in the library surfaces as an Error carrying a code, so the CLI
// can map config problems to exit status 2 and tests can assert on the kind.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace osmp
