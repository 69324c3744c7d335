#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "pattern_entropy/distributions.hpp"
#include "pattern_entropy/error.hpp"
#include "pattern_entropy/grids.hpp"

namespace pe {

// Restricted growth string: first index 1, each next at most one above the running max.
struct Pattern {
    std::vector<std::uint32_t> indices;
    std::uint32_t m = 0;

    std::size_t size() const { return indices.size(); }
    bool operator==(const Pattern&) const = default;
};

using BinSeq = std::vector<std::uint32_t>;

bool is_restricted_growth(const std::vector<std::uint32_t>& s);
Pattern make_pattern(std::vector<std::uint32_t> indices);  // validates

// Digits when m <= 9, comma separated otherwise.
std::string to_string(const Pattern& p);
Pattern parse_pattern(const std::string& s);

template <class Seq>
Pattern extract_pattern(const Seq& x) {
    if (x.empty()) throw ValidationError("cannot take the pattern of an empty sequence");
    using T = std::decay_t<decltype(x[0])>;
    std::unordered_map<T, std::uint32_t> first;
    Pattern p;
    p.indices.reserve(x.size());
    for (const auto& s : x) {
        auto [it, fresh] = first.try_emplace(s, p.m + 1);
        if (fresh) ++p.m;
        p.indices.push_back(it->second);
    }
    return p;
}

inline Pattern extract_pattern(const std::string& x) {
    return extract_pattern(std::vector<char>(x.begin(), x.end()));
}

// Visits every restricted growth string of length n with at most k distinct
// indices. Throws ResourceCapError once more than cap strings are produced.
void for_each_pattern(std::size_t n, std::size_t k, const std::function<void(const Pattern&)>& fn,
                      std::uint64_t cap = 10'000'000);
std::vector<Pattern> enumerate_patterns(std::size_t n, std::size_t k,
                                        std::uint64_t cap = 10'000'000);

// Injection-sum probability of a pattern. Zero when psi has more distinct
// indices than the alphabet. Needs k <= 24.
double pattern_probability(const ParamVector& theta, const Pattern& psi);
double pattern_probability(const std::vector<double>& theta, const Pattern& psi);

// x holds 1-based letters into the ascending theta.
BinSeq bin_sequence(const ParamVector& theta, const Grid& grid,
                    const std::vector<std::uint64_t>& x);

}  // namespace pe
