#include <cmath>
#include <random>

#include "doctest.h"
#include "pattern_entropy/coder.hpp"
#include "pattern_entropy/error.hpp"
#include "pattern_entropy/oracle.hpp"
#include "pattern_entropy/verify.hpp"

using namespace pe;

namespace {

Grid small_grid(std::size_t n) { return build_grid(GridKind::eta, std::max<double>(n, 2.0), 0.25); }

}  // namespace

TEST_CASE("fair coin, two draws") {
    auto t = ParamVector::from_levels({{0.5, 2}});
    auto e = exact_entropies(t, small_grid(2), 2);
    CHECK(e.h_pattern == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(e.h_x_block == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(e.sequences == 4);
}

TEST_CASE("biased coin, two draws") {
    auto t = ParamVector::from_probs({0.25, 0.75});
    auto e = exact_entropies(t, small_grid(2), 2);
    CHECK(e.h_pattern == doctest::Approx(0.95443400292496496).epsilon(1e-14));
    CHECK(e.h_pattern_grouped == doctest::Approx(e.h_pattern).epsilon(1e-14));
}

TEST_CASE("single letter has zero entropy everywhere") {
    auto t = ParamVector::from_probs({1.0});
    for (std::size_t n : {1, 3, 7}) {
        auto e = exact_entropies(t, small_grid(n), n);
        CHECK(e.h_pattern == 0.0);
        CHECK(e.h_x_block == 0.0);
        CHECK(e.h_joint == 0.0);
        CHECK(e.expected_codelength == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("three equiprobable letters over ten draws") {
    auto t = ParamVector::from_levels({{1.0 / 3.0, 3}});
    auto e = exact_entropies(t, small_grid(10), 10);
    CHECK(e.sequences == 59049);
    CHECK(e.h_pattern == doctest::Approx(13.264713311753831).epsilon(1e-12));
}

TEST_CASE("entropy chain and prefix route on the oracle matrix") {
    for (const auto& inst : oracle_matrix(kDefaultSeed, 48)) {
        Grid g = small_grid(inst.n);
        auto e = exact_entropies(inst.theta, g, inst.n);
        CHECK(e.h_pattern <= e.h_joint + 1e-9);
        CHECK(e.h_joint <= e.expected_codelength + 1e-9);
        CHECK(e.h_pattern <= e.h_x_block + 1e-9);
        auto pre = expected_codelength_by_prefix(inst.theta, g, inst.n);
        CHECK(pre.expected_codelength == doctest::Approx(e.expected_codelength).epsilon(1e-10));
        auto dec = codelength_decomposition(make_coder_model(inst.theta, g), inst.theta, e.distinct_pmf);
        CHECK(std::fabs(dec.total() - e.expected_codelength) <= 1e-6);
    }
}

TEST_CASE("pattern entropy is nondecreasing in n") {
    auto t = ParamVector::from_probs({0.1, 0.2, 0.3, 0.4});
    double prev = 0;
    for (std::size_t n = 1; n <= 7; ++n) {
        double h = exact_entropies(t, small_grid(n), n).h_pattern;
        CHECK(h >= prev - 1e-12);
        prev = h;
    }
}

TEST_CASE("distinct count distributions are proper") {
    auto t = ParamVector::from_probs({0.1, 0.2, 0.3, 0.4});
    auto e = exact_entropies(t, small_grid(5), 5);
    for (const auto& pmf : e.distinct_pmf) {
        if (pmf.empty()) continue;
        double s = 0;
        for (double p : pmf) s += p;
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("exact enumeration respects its cap") {
    auto t = ParamVector::from_levels({{0.25, 4}});
    CHECK_THROWS_AS(exact_entropies(t, small_grid(12), 12, 1000), ResourceCapError);
}

TEST_CASE("Monte Carlo brackets the exact value") {
    auto t = ParamVector::from_levels({{0.5, 2}});
    auto m = mc_pattern_entropy(t, 2, 100000, 5);
    CHECK(m.samples == 100000);
    CHECK(std::fabs(m.estimate - 1.0) <= 3 * m.standard_error);
    auto one = mc_pattern_entropy(ParamVector::from_probs({1.0}), 6, 1000, 5);
    CHECK(one.estimate == 0.0);
    CHECK(one.standard_error == 0.0);
}

TEST_CASE("Monte Carlo is consistent over fixed seeds") {
    auto t = ParamVector::from_probs({0.2, 0.3, 0.5});
    double exact = exact_entropies(t, small_grid(6), 6).h_pattern;
    int inside = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        auto m = mc_pattern_entropy(t, 6, 2000, seed);
        inside += std::fabs(m.estimate - exact) <= 3 * m.standard_error;
    }
    CHECK(inside >= 99);
}

TEST_CASE("in-bin permutation counts") {
    CHECK(brute_force_permutation_count({0, 0, 1, 1}) == 4);
    CHECK(brute_force_permutation_count({0, 1, 2, 3}) == 1);
    CHECK(brute_force_permutation_count({0, 0, 0, 1, 1}) == 12);
    CHECK(product_of_factorials({0, 0, 0, 1, 1}) == 12);
    CHECK(brute_force_permutation_count({3, 3, 3, 3, 3, 3, 3}) == 5040);
}
