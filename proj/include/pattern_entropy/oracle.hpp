#pragma once

#include <cstdint>
#include <vector>

#include "pattern_entropy/coder.hpp"
#include "pattern_entropy/distributions.hpp"
#include "pattern_entropy/grids.hpp"

namespace pe {

struct ExactEntropies {
    double h_x_block = 0.0;            // n H(X)
    double h_pattern = 0.0;            // over enumerated patterns
    double h_pattern_grouped = 0.0;    // same, grouping raw sequences by pattern
    double h_joint = 0.0;              // H(Psi^n, B^n)
    double expected_codelength = 0.0;  // E[-log Q]
    // distinct_pmf[b][m] = P(m distinct letters of bin b occur)
    std::vector<std::vector<double>> distinct_pmf;
    std::uint64_t sequences = 0;
};

// Enumerates all k^n sequences; grid gives the bins for B^n and Q.
ExactEntropies exact_entropies(const ParamVector& theta, const Grid& grid, std::size_t n,
                               std::uint64_t cap = 10'000'000);

// Second route: walk joint (pattern, bin) prefixes, weigh each step's -log Q by
// the prefix probability from a bin-restricted injection sum.
struct PrefixExpectation {
    double expected_codelength = 0.0;
    double h_joint = 0.0;
    std::uint64_t nodes = 0;
};
PrefixExpectation expected_codelength_by_prefix(const ParamVector& theta, const Grid& grid,
                                                std::size_t n, std::uint64_t cap = 10'000'000);

// Analytic split of E[-log Q]: large-letter cost, first-occurrence gain, and the
// bin 0/1 terms, using the per-bin distinct-count distributions.
struct CodelengthDecomposition {
    double large_letter_cost = 0.0;
    double first_occurrence_gain = 0.0;
    double r0 = 0.0, r1 = 0.0;
    double total() const { return large_letter_cost - first_occurrence_gain - r0 - r1; }
};
CodelengthDecomposition codelength_decomposition(const CoderModel& model, const ParamVector& theta,
                                                 const std::vector<std::vector<double>>& distinct_pmf);

struct McEstimate {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t samples = 0;
};
McEstimate mc_pattern_entropy(const ParamVector& theta, std::size_t n, std::size_t samples,
                              std::uint64_t seed);

// Permutations of the letters that keep each letter inside its bin.
std::uint64_t brute_force_permutation_count(const std::vector<std::uint32_t>& bin_of_letter);
std::uint64_t product_of_factorials(const std::vector<std::uint32_t>& bin_of_letter);

}  // namespace pe
