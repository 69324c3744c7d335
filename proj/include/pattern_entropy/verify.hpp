#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pattern_entropy/distributions.hpp"

namespace pe {

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct SuiteResult {
    std::string name;
    int criterion = 0;
    bool passed = true;
    std::uint64_t checks = 0;
    std::uint64_t failures = 0;
    double seconds = 0.0;
    double time_limit = 0.0;  // 0 when the suite has no limit
    std::vector<std::string> messages;
};

struct OracleInstance {
    ParamVector theta;
    std::size_t n = 0;
};

// Fixed matrix: n in 2..7, k in 1..4, random theta.
std::vector<OracleInstance> oracle_matrix(std::uint64_t seed = kDefaultSeed, std::size_t count = 200);

const std::vector<std::string>& suite_names();
SuiteResult run_suite(const std::string& name, std::uint64_t seed = kDefaultSeed);

}  // namespace pe
