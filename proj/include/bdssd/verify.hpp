#pragma once

// Identity battery run by `bdssd verify`: every check either passes, fails
// with its measured residual, or is skipped with a stated reason.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bdssd/chain_io.hpp"

namespace bdssd {

enum class VerifyProfile { Exact, Full };
VerifyProfile parse_verify_profile(std::string_view text);
std::string_view to_string(VerifyProfile p);

enum class CheckStatus { Pass, Fail, Skipped };
std::string_view to_string(CheckStatus s);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Skipped;
  std::optional<double> measured;
  std::optional<double> threshold;
  /// Reason for a skip, or extra context for a pass or failure.
  std::string detail;
};

struct VerifyOptions {
  VerifyProfile profile = VerifyProfile::Exact;
  std::size_t replicas = 100'000;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Runs the battery applicable to the chain. Module errors raised by a check
/// that was expected to apply are rethrown with the check name prefixed.
VerifyReport verify(const ChainSpec& spec, const VerifyOptions& opts = {});

nlohmann::ordered_json to_json(const VerifyReport& report);

}  // namespace bdssd
