#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "pattern_entropy/error.hpp"
#include "pattern_entropy/grids.hpp"
#include "pattern_entropy/patterns.hpp"

using namespace pe;

namespace {

std::vector<double> random_theta(std::mt19937_64& rng, std::size_t k) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> w(k);
    double s = 0;
    for (auto& x : w) s += (x = u(rng));
    for (auto& x : w) x /= s;
    return w;
}

// Direct sum of P(y^n) over all y^n with the given pattern.
double direct_probability(const std::vector<double>& theta, const Pattern& psi) {
    const std::size_t n = psi.size(), k = theta.size();
    std::vector<std::size_t> y(n, 0);
    double total = 0;
    while (true) {
        if (extract_pattern(y) == psi) {
            double p = 1;
            for (auto s : y) p *= theta[s];
            total += p;
        }
        std::size_t i = 0;
        while (i < n && ++y[i] == k) y[i++] = 0;
        if (i == n) break;
    }
    return total;
}

std::vector<std::string> strings(const std::vector<Pattern>& ps) {
    std::vector<std::string> out;
    for (const auto& p : ps) out.push_back(to_string(p));
    return out;
}

}  // namespace

TEST_CASE("patterns of lossless and sellsoll coincide") {
    CHECK(to_string(extract_pattern(std::string("lossless"))) == "12331433");
    CHECK(to_string(extract_pattern(std::string("sellsoll"))) == "12331433");
    CHECK(to_string(extract_pattern(std::string("aaaaa"))) == "11111");
}

TEST_CASE("pattern extraction is idempotent, prefix consistent and label invariant") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 200; ++t) {
        std::vector<int> x(1 + rng() % 30);
        for (auto& s : x) s = static_cast<int>(rng() % 6);
        auto p = extract_pattern(x);
        CHECK(extract_pattern(p.indices) == p);
        CHECK(is_restricted_growth(p.indices));
        for (std::size_t j = 1; j <= x.size(); ++j) {
            auto q = extract_pattern(std::vector<int>(x.begin(), x.begin() + j));
            CHECK(q.indices == std::vector<std::uint32_t>(p.indices.begin(), p.indices.begin() + j));
        }
        std::vector<int> relabeled(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) relabeled[i] = 100 - 7 * x[i];
        CHECK(extract_pattern(relabeled) == p);
    }
}

TEST_CASE("restricted growth validation and rendering") {
    CHECK(is_restricted_growth({1, 2, 1, 3}));
    CHECK_FALSE(is_restricted_growth({2, 1}));
    CHECK_FALSE(is_restricted_growth({1, 3}));
    CHECK_FALSE(is_restricted_growth({}));
    CHECK_THROWS_AS(make_pattern({1, 3}), ValidationError);
    std::vector<std::uint32_t> long_idx;
    for (std::uint32_t i = 1; i <= 11; ++i) long_idx.push_back(i);
    auto p = make_pattern(long_idx);
    CHECK(to_string(p) == "1,2,3,4,5,6,7,8,9,10,11");
    CHECK(parse_pattern(to_string(p)) == p);
    CHECK(parse_pattern("12331433") == extract_pattern(std::string("lossless")));
    CHECK_THROWS_AS(parse_pattern("21"), ValidationError);
}

TEST_CASE("enumeration is lexicographic") {
    CHECK(strings(enumerate_patterns(2, 2)) == std::vector<std::string>{"11", "12"});
    CHECK(strings(enumerate_patterns(3, 3)) == std::vector<std::string>{"111", "112", "121", "122", "123"});
    CHECK(strings(enumerate_patterns(3, 1)) == std::vector<std::string>{"111"});
    CHECK(enumerate_patterns(8, 8).size() == 4140);
    CHECK(enumerate_patterns(6, 2).size() == 32);
}

TEST_CASE("enumeration respects its cap") {
    CHECK_THROWS_AS(enumerate_patterns(12, 12, 1000), ResourceCapError);
}

TEST_CASE("two-letter pattern probabilities") {
    std::vector<double> t{0.25, 0.75};
    CHECK(pattern_probability(t, make_pattern({1, 2})) == doctest::Approx(0.375).epsilon(1e-15));
    CHECK(pattern_probability(t, make_pattern({1, 1})) == doctest::Approx(0.625).epsilon(1e-15));
    CHECK(pattern_probability(t, make_pattern({1})) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(pattern_probability(t, make_pattern({1, 2, 3})) == 0.0);
    CHECK(pattern_probability(ParamVector::from_probs(t), make_pattern({1, 2})) ==
          doctest::Approx(0.375).epsilon(1e-15));
}

TEST_CASE("pattern probabilities sum to one") {
    std::mt19937_64 rng(11);
    for (std::size_t n = 1; n <= 8; ++n)
        for (std::size_t k = 1; k <= 4; ++k) {
            auto t = random_theta(rng, k);
            double s = 0;
            for (const auto& p : enumerate_patterns(n, k)) s += pattern_probability(t, p);
            CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
        }
}

TEST_CASE("injection sum agrees with direct summation over sequences") {
    std::mt19937_64 rng(17);
    for (std::size_t n = 1; n <= 6; ++n)
        for (std::size_t k = 1; k <= 4; ++k) {
            auto t = random_theta(rng, k);
            for (const auto& p : enumerate_patterns(n, k))
                CHECK(pattern_probability(t, p) == doctest::Approx(direct_probability(t, p)).epsilon(1e-12));
        }
}

TEST_CASE("bin sequences follow bin_index") {
    auto theta = ParamVector::from_probs({0.05, 0.95});
    Grid g = build_grid(GridKind::tau, 100, 0.0);
    CHECK(bin_sequence(theta, g, {2, 1}) == BinSeq{9, 2});
    CHECK(bin_sequence(theta, g, {1}) == BinSeq{2});
    auto same = ParamVector::from_levels({{0.25, 4}});
    CHECK(bin_sequence(same, g, {1, 2, 3, 4, 1}) == BinSeq(5, 4));
    CHECK_THROWS_AS(bin_sequence(theta, g, {3}), ValidationError);
}
