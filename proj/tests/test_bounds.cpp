#include <cmath>
#include <random>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "doctest.h"
#include "pattern_entropy/bounds.hpp"
#include "pattern_entropy/error.hpp"
#include "pattern_entropy/numeric.hpp"
#include "pattern_entropy/oracle.hpp"

using namespace pe;

namespace {

double term(const BoundReport& r, const std::string& name) {
    const Term* t = r.find(name);
    REQUIRE_MESSAGE(t != nullptr, "missing term " << name << " in " << r.name);
    return t->value;
}

void check_term_sum(const BoundReport& r) {
    Sum s;
    for (const auto& t : r.terms) s += t.value;
    CHECK(r.value == doctest::Approx(static_cast<double>(s.value())).epsilon(1e-12));
}

ParamVector random_theta(std::mt19937_64& rng, std::size_t k, double floor) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> w(k);
    double s = 0;
    for (auto& x : w) s += (x = u(rng));
    for (auto& x : w) x = floor + (1.0 - k * floor) * x / s;
    return ParamVector::from_probs(w);
}

}  // namespace

TEST_CASE("simple sandwich values") {
    auto [lo, hi] = simple_bounds(ParamVector::from_levels({{0.5, 2}}), 2);
    CHECK(lo.value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(hi.value == doctest::Approx(2.0).epsilon(1e-15));
    auto [lo1, hi1] = simple_bounds(ParamVector::from_probs({1.0}), 5);
    CHECK(lo1.value == 0.0);
    CHECK(hi1.value == 0.0);
    auto [lo3, hi3] = simple_bounds(ParamVector::from_levels({{1.0 / 3.0, 3}}), 2);
    CHECK(lo3.value == doctest::Approx(0.58496250072115618).epsilon(1e-13));
    CHECK(hi3.value == doctest::Approx(3.1699250014423124).epsilon(1e-13));
}

TEST_CASE("first upper bound with no shared bins is nH") {
    auto theta = ParamVector::from_probs({0.05, 0.17, 0.78});
    auto r = upper_bound_ub1(theta, 100, 0.1);
    CHECK(r.value == doctest::Approx(100 * iid_entropy(theta)).epsilon(1e-14));
    CHECK(term(r, "-(1-eps)*sum_log_kb!") == 0.0);
    CHECK(!r.residual_flags.empty());
}

TEST_CASE("first upper bound deducts (1-eps) log 3! for three letters in a bin") {
    auto r = upper_bound_ub1(ParamVector::from_levels({{1.0 / 3.0, 3}}), 100, 0.1);
    CHECK(term(r, "-(1-eps)*sum_log_kb!") == doctest::Approx(-2.3264662506490406).epsilon(1e-13));
    check_term_sum(r);
}

TEST_CASE("first upper bound on a uniform source at n=1e6") {
    // k=1000 keeps every letter above 1/n^(1-eps) and inside one eta bin.
    auto theta = ParamVector::from_levels({{1e-3, 1000}});
    const double eps = 0.25;
    auto r = upper_bound_ub1(theta, 1e6, eps);
    CHECK(term(r, "-(1-eps)*sum_log_kb!") == doctest::Approx(-(1 - eps) * log2_factorial(1000)).epsilon(1e-12));
    CHECK(r.valid);
    auto tight = upper_bound_ub1(theta, 1e6, eps, true);
    CHECK(tight.name == "ub1_tight");
    CHECK(tight.value >= r.value);
}

TEST_CASE("epsilon_n is clamped to one") {
    CHECK(epsilon_n(100, 0.1) == 1.0);
    CHECK(epsilon_n(1e50, 0.5) < 1e-10);
}

TEST_CASE("second lower bound with isolated singletons") {
    auto theta = ParamVector::from_probs({0.05, 0.17, 0.78});
    auto [a, b] = lower_bound_lb2(theta, 100, 0.0);
    const double nH = 100 * iid_entropy(theta);
    CHECK(a.value == doctest::Approx(nH - 3 * std::log2(3.0)).epsilon(1e-13));
    CHECK(b.value == doctest::Approx(nH).epsilon(1e-13));
}

TEST_CASE("second lower bound with adjacent pairs uses the overlap counter") {
    auto theta = ParamVector::from_probs({0.2, 0.2, 0.3, 0.3});
    auto [a, b] = lower_bound_lb2(theta, 100, 0.0);
    const double nH = 100 * iid_entropy(theta);
    CHECK(b.value == doctest::Approx(nH - 2 * std::log2(24.0)).epsilon(1e-13));
    CHECK(a.value == doctest::Approx(nH - 2 * std::log2(2.0) - 4 * std::log2(3.0)).epsilon(1e-13));
}

TEST_CASE("second lower bound with one full bin") {
    auto theta = ParamVector::from_levels({{0.25, 4}});
    auto [a, b] = lower_bound_lb2(theta, 100, 0.0);
    CHECK(a.value == doctest::Approx(200 - std::log2(24.0) - 4 * std::log2(3.0)).epsilon(1e-13));
    check_term_sum(a);
    check_term_sum(b);
}

TEST_CASE("staircase deduction is beta log d!") {
    const std::uint64_t d = 4, beta = 6;
    const double eps = 0.2;
    auto st = make_staircase(d, beta, eps);
    auto [a, b] = lower_bound_lb2(st.theta, st.n, eps);
    CHECK(term(a, "-sum_log_kappa_b!") == doctest::Approx(-static_cast<double>(beta) * std::log2(24.0)).epsilon(1e-12));
}

TEST_CASE("third bound collapses to the first without low letters") {
    auto theta = ParamVector::from_probs({0.1, 0.15, 0.15, 0.2, 0.4});
    auto u1 = upper_bound_ub1(theta, 1000, 0.25);
    auto u3 = upper_bound_ub3(theta, 1000, 0.25, Ub3Variant::ub3);
    CHECK(u3.value == doctest::Approx(u1.value).epsilon(1e-12));
    CHECK(term(u3, "-(1-eps)*sum_log_kb!") == term(u1, "-(1-eps)*sum_log_kb!"));
    CHECK(term(u3, "bin0_penalty") == 0.0);
    auto l4 = lower_bound_lb4(theta, 1000, 0.25);
    CHECK(term(l4, "S2_b1") == 0.0);
    CHECK(term(l4, "S3") == 0.0);
}

TEST_CASE("third bound family on the two level example") {
    SourceSpec s;
    s.family = Family::two_level;
    s.n = 1e6;
    s.nu = 0.4;
    s.mu = 0.5;
    s.phi0 = 0.5;
    auto theta = make_distribution(s).theta;
    const double n = 1e6, eps = 0.45;
    auto ub3 = upper_bound_ub3(theta, n, eps, Ub3Variant::ub3);
    double lead = 0.6 * n * 0.5 * std::log2(n) + n * 0.5;
    CHECK(std::fabs(ub3.value - lead) / lead < 0.05);
    double c1 = upper_bound_ub3(theta, n, eps, Ub3Variant::c1).value;
    for (auto v : {Ub3Variant::ub3, Ub3Variant::c21, Ub3Variant::c2_loosened, Ub3Variant::c2_exact}) {
        auto r = upper_bound_ub3(theta, n, eps, v);
        check_term_sum(r);
        CHECK(r.value < c1);
    }
}

TEST_CASE("loosened c2 on the uniform family") {
    SourceSpec s;
    s.family = Family::uniform;
    s.n = 1e6;
    s.nu = 0.4;
    auto theta = make_distribution(s).theta;
    const double n = 1e6, k = static_cast<double>(theta.size());
    auto r = upper_bound_ub3(theta, n, 0.45, Ub3Variant::c2_loosened);
    double lead = n * std::log2(k) - k * std::log2(k / kE);
    CHECK(std::fabs(r.value - lead) / lead < 1e-3);
}

TEST_CASE("upper bounds dominate the exact pattern entropy on small instances") {
    std::mt19937_64 rng(23);
    const double eps = 0.25;
    for (std::size_t n = 2; n <= 6; ++n)
        for (std::size_t k = 1; k <= 4; ++k) {
            double floor = std::pow(static_cast<double>(n), -(1 - eps)) * 1.01;
            if (k * floor >= 1.0) continue;
            auto theta = random_theta(rng, k, floor);
            Grid g = build_grid(GridKind::eta, n, eps);
            double h = exact_entropies(theta, g, n).h_pattern;
            auto [lo, hi] = simple_bounds(theta, n);
            CHECK(lo.value <= h + 1e-9);
            CHECK(h <= hi.value + 1e-9);
            const double slack = k * std::log2(3.0);
            auto u1 = upper_bound_ub1(theta, n, eps);
            auto [a, b] = lower_bound_lb2(theta, n, eps);
            CHECK(h <= u1.value + slack);
            CHECK(a.value <= h + slack);
            for (auto v : {Ub3Variant::c2_exact, Ub3Variant::c2_loosened})
                CHECK(upper_bound_ub3(theta, n, eps, v).value >= h - slack);
        }
}

TEST_CASE("distinct count distribution under independent occurrences") {
    std::vector<Level> letters{{0.1, 2}, {0.3, 1}};
    const double n = 3;
    auto pmf = distinct_count_pmf(letters, n);
    double p1 = 1 - std::pow(0.9, 3), p2 = 1 - std::pow(0.7, 3);
    std::vector<double> want(4, 0.0);
    for (int m1 = 0; m1 < 2; ++m1)
        for (int m2 = 0; m2 < 2; ++m2)
            for (int m3 = 0; m3 < 2; ++m3)
                want[m1 + m2 + m3] += (m1 ? p1 : 1 - p1) * (m2 ? p1 : 1 - p1) * (m3 ? p2 : 1 - p2);
    REQUIRE(pmf.size() >= 4);
    for (int m = 0; m < 4; ++m) CHECK(pmf[m] == doctest::Approx(want[m]).epsilon(1e-14));
    double falling = want[1] * std::log2(3.0) + want[2] * std::log2(6.0) + want[3] * std::log2(6.0);
    CHECK(expected_log_falling(letters, n) == doctest::Approx(falling).epsilon(1e-13));
}

TEST_CASE("Poisson binomial work cap") {
    std::vector<Level> letters;
    for (int i = 0; i < 2000; ++i) letters.push_back({1e-4 * (1 + i * 1e-4), 1});
    CHECK_THROWS_AS(distinct_count_pmf(letters, 1e4, 1000), ResourceCapError);
}

TEST_CASE("fourth bound options and constants") {
    Lb4Options o;
    CHECK(o.vartheta_minus == std::exp(-5.5));
    CHECK(o.vartheta_plus == std::exp(1.4));
    auto c = lb4_constants(o.vartheta_minus, o.vartheta_plus);
    CHECK(c.gamma_minus == doctest::Approx(0.18107513246573381).epsilon(1e-13));
    CHECK(c.gamma_plus == doctest::Approx(2.1822856906033389).epsilon(1e-13));
    CHECK(c.f == doctest::Approx(0.50949585196807533).epsilon(1e-12));
    CHECK(c.eps_prime_coeff == doctest::Approx(2.7612847396072938).epsilon(1e-13));
}

TEST_CASE("fourth bound with one low letter of mass 1/n") {
    const double n = 100;
    auto theta = ParamVector::from_probs({0.01, 0.33, 0.33, 0.33});
    auto r = lower_bound_lb4(theta, n, 0.2);
    CHECK(term(r, "S2_b1") == doctest::Approx(0.0).epsilon(1e-15));
    check_term_sum(r);
    Lb4Options o;
    o.s3_double_sum = true;
    o.s1 = S1Variant::b2;
    o.s2 = S2Variant::b2;
    auto r2 = lower_bound_lb4(theta, n, 0.2, o);
    CHECK(r2.find("S3_nested") != nullptr);
    CHECK(r2.find("-S1_b2") != nullptr);
    check_term_sum(r2);
}

TEST_CASE("fourth bound window term") {
    const double n = 1000;
    // 20 letters at 1/n sit inside the window; the rest far above it
    auto theta = ParamVector::from_levels({{1e-3, 20}, {0.49, 2}});
    auto r = lower_bound_lb4(theta, n, 0.25);
    CHECK(term(r, "-S4") <= 0.0);
    auto big = ParamVector::from_levels({{0.25, 4}});
    CHECK(term(lower_bound_lb4(big, n, 0.25), "-S4") == 0.0);
}

TEST_CASE("contribution limits") {
    auto none = contribution_limits(ParamVector::from_levels({{0.25, 4}}), 100, 0.2);
    CHECK(none.first.value == 0.0);
    CHECK(none.second.value == 0.0);
    auto theta = ParamVector::from_levels({{1e-3, 500}, {0.25, 2}});
    auto [p1, p2] = contribution_limits(theta, 100, 0.2);
    CHECK(p2.value == doctest::Approx(103.66036395960075).epsilon(1e-12));
    auto many = ParamVector::from_levels({{5e-6, 100000}, {0.5, 1}});
    double t1 = term(contribution_limits(many, 100, 0.2).first, "n*phi01*log(ell01)");
    double t2 = term(contribution_limits(many, 200, 0.2).first, "n*phi01*log(ell01)");
    CHECK(t2 / t1 == doctest::Approx(2 * (1 + std::log(2.0) / std::log(100.0))).epsilon(1e-12));
}

TEST_CASE("gamma fixed point") {
    auto g = gamma_fixed_point(11.0);
    CHECK(g.root_found);
    CHECK(g.gamma == doctest::Approx(8.6009301893854351).epsilon(1e-12));
    CHECK(std::fabs(g.residual) < 1e-9);
    auto none = gamma_fixed_point(3.0);
    CHECK_FALSE(none.root_found);
    CHECK(none.gamma == 2.0);
    CHECK(none.residual > 0.0);
}

TEST_CASE("range bound below and at the threshold") {
    const double n = 1e6, eps = 0.2;
    const double thr = std::pow(n, 1.0 / 3.0 + eps);
    auto below = range_bound(1000, n * std::log2(1000.0), n, eps, 20);
    CHECK_FALSE(below.above_threshold);
    CHECK(below.upper_asymptotic.value == n * std::log2(1000.0));
    CHECK(below.upper_nonasymptotic.value == n * std::log2(1000.0));
    CHECK(below.decrease_nonasymptotic == 0.0);
    auto at = range_bound(thr, n * std::log2(thr), n, eps, 20);
    CHECK(at.above_threshold);
    CHECK(at.decrease_asymptotic == at.decrease_asymptotic_formula);
    CHECK(at.decrease_nonasymptotic_raw != 0.0);
    CHECK(at.lower.value == doctest::Approx(n * std::log2(thr) - log2_factorial(thr)));
}

TEST_CASE("region sweep defaults") {
    auto ks = default_region_ks(1e6, 0.2, 20);
    CHECK(ks.front() == 2.0);
    CHECK(ks.back() == std::floor(1e6 / 20));
    CHECK(std::find(ks.begin(), ks.end(), std::pow(1e6, 1.0 / 3.0 + 0.2)) != ks.end());
    CHECK(std::is_sorted(ks.begin(), ks.end()));
}

TEST_CASE("Stirling bracket") {
    auto b1 = stirling_log_bounds<double>(1.0);
    CHECK(std::exp(b1.lo) == doctest::Approx(0.92213700889578912).epsilon(1e-14));
    CHECK(std::exp(b1.hi) == doctest::Approx(1.0022744491822267).epsilon(1e-14));
    auto b10 = stirling_log_bounds<double>(10.0);
    CHECK(b10.lo <= std::log(3628800.0));
    CHECK(std::log(3628800.0) <= b10.hi);
    using big = boost::multiprecision::cpp_bin_float_50;
    auto b = stirling_log_bounds<big>(big(1000));
    big exact = boost::math::lgamma(big(1001));
    CHECK(b.lo <= exact);
    CHECK(exact <= b.lo + big(1) / big(12000));
    CHECK(static_cast<double>(exact) == doctest::Approx(5912.1281784881633).epsilon(1e-15));
}

TEST_CASE("packed entropies") {
    auto flat = ParamVector::from_levels({{0.25, 4}});
    auto p = packed_entropies(flat, build_grid(GridKind::eta, 100, 0.2));
    CHECK(p.h0 == doctest::Approx(2.0));
    CHECK(p.h01 == doctest::Approx(2.0));
    CHECK(p.h0_1 == doctest::Approx(2.0));
    // At n=8, eps=0.3 bin 0 holds 0.05 and bin 1 holds 0.1.
    auto theta = ParamVector::from_probs({0.05, 0.1, 0.35, 0.5});
    auto s = bin_stats(build_grid(GridKind::eta, 8, 0.3), theta);
    REQUIRE(s.count[0] == 1);
    REQUIRE(s.count[1] == 1);
    auto q = packed_entropies(theta, s);
    CHECK(q.h01 == doctest::Approx(1.4406454496153463).epsilon(1e-13));
    CHECK(q.h0_1 == doctest::Approx(iid_entropy(theta)).epsilon(1e-13));
    CHECK(q.h0 == doctest::Approx(iid_entropy(theta)).epsilon(1e-13));
}
