#pragma once

// Machine-checkable invariant suite spanning all modules; the CLI `validate`
// subcommand and tests run it.

#include <cstdint>
#include <string>
#include <vector>

namespace shotnoise {

struct CheckResult {
    std::string module;
    std::string name;
    bool pass = false;
    double measured = 0.0;   // the quantity compared against `bound`
    double bound = 0.0;
    std::string note;
};

// Runs every registered invariant (restricted to `only` when non-empty).
// Deterministic checks ignore the seed.
std::vector<CheckResult> run_validation(const std::string& only, std::uint64_t seed);

}  // namespace shotnoise
