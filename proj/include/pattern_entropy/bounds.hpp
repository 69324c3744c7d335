#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pattern_entropy/distributions.hpp"
#include "pattern_entropy/grids.hpp"

namespace pe {

struct Term {
    std::string name;
    double value = 0.0;
};

// A bound in bits. value is always the sum of terms, in order.
struct BoundReport {
    BoundReport() = default;
    explicit BoundReport(std::string n) : name(std::move(n)) {}

    std::string name;
    double value = 0.0;
    std::vector<Term> terms;
    std::vector<std::string> residual_flags;  // remainders with no numeric constant
    bool valid = true;                        // preconditions of the bound hold
    std::vector<std::string> notes;

    void add(const std::string& term, double v);
    const Term* find(const std::string& term) const;
};

struct PackedEntropies {
    double h0 = 0.0;    // bin 0 packed into one mass
    double h01 = 0.0;   // bins 0 and 1 packed into one mass
    double h0_1 = 0.0;  // bins 0 and 1 packed into one mass each
};

// stats must come from an eta (or tau, for h0) grid over theta.
PackedEntropies packed_entropies(const ParamVector& theta, const BinStats& stats);
PackedEntropies packed_entropies(const ParamVector& theta, const Grid& grid);

// Lower and upper bound from data processing on x^n.
std::pair<BoundReport, BoundReport> simple_bounds(const ParamVector& theta, double n);

// Substitute for epsilon in the permutation gain, clamped to 1.
double epsilon_n(double n, double epsilon);
bool epsilon_in_regime(double n, double epsilon, double delta);

BoundReport upper_bound_ub1(const ParamVector& theta, double n, double epsilon, bool tighten = false);
std::pair<BoundReport, BoundReport> lower_bound_lb2(const ParamVector& theta, double n, double epsilon);

enum class Ub3Variant { ub3, c1, c21, c2_exact, c2_loosened };
Ub3Variant ub3_variant_from_string(const std::string& s);
std::string to_string(Ub3Variant v);

struct Ub3Options {
    std::uint64_t pb_work_cap = 400'000'000;  // Poisson-binomial DP cell budget
};
BoundReport upper_bound_ub3(const ParamVector& theta, double n, double epsilon, Ub3Variant variant,
                               const Ub3Options& opt = {});

// Distribution of the number of distinct letters seen in n draws, treating
// letter occurrences as independent with p_i = 1 - (1 - theta_i)^n.
std::vector<double> distinct_count_pmf(const std::vector<Level>& letters, double n,
                                       std::uint64_t work_cap = 400'000'000);
// E[log2 c!/(c-M)!] under the same model.
double expected_log_falling(const std::vector<Level>& letters, double n,
                            std::uint64_t work_cap = 400'000'000);

enum class S1Variant { b1, b2 };
enum class S2Variant { b1, b2 };

struct Lb4Options {
    S1Variant s1 = S1Variant::b1;
    S2Variant s2 = S2Variant::b1;
    double vartheta_minus = std::exp(-5.5);
    double vartheta_plus = std::exp(1.4);
    bool s3_double_sum = false;  // sum the nested form from i = 0 instead
};
BoundReport lower_bound_lb4(const ParamVector& theta, double n, double epsilon, const Lb4Options& opt = {});

struct Lb4Constants {
    double gamma_minus = 0.0, gamma_plus = 0.0;
    double f = 0.0;                // divergence exponent
    double eps_prime_coeff = 0.0;  // ln v- / (2 (v- - 1))
};
Lb4Constants lb4_constants(double vartheta_minus, double vartheta_plus);
// n k e^{-f n^eps} + coeff / n^{1+eps}, k = letters above n^-3.
double epsilon_prime_n(double n, double epsilon, double k_large, const Lb4Constants& c);

// Part I and Part II of the low-probability contribution limits.
std::pair<BoundReport, BoundReport> contribution_limits(const ParamVector& theta, double n, double epsilon,
                                                        std::optional<double> mu = std::nullopt);

// gamma >= 2 with gamma = ln((gamma-1)^2/gamma^3) + c. Returns 2 with a
// positive residual when no root lies at or above 2.
struct GammaSolution {
    double gamma = 2.0;
    double residual = 0.0;
    int iterations = 0;
    bool root_found = false;
};
GammaSolution gamma_fixed_point(double c);

struct RangeResult {
    BoundReport lower, upper_asymptotic, upper_nonasymptotic;
    double k = 0.0, threshold = 0.0;
    bool above_threshold = false;
    double decrease_lower = 0.0;            // log2 k!
    double decrease_lower_stirling = 0.0;   // Stirling form of log2 k!
    double decrease_asymptotic = 0.0;       // after the branch rule
    double decrease_asymptotic_formula = 0.0;
    double decrease_nonasymptotic = 0.0;    // clamped at 0
    double decrease_nonasymptotic_raw = 0.0;
    GammaSolution gamma;
    double beta_gamma = 0.0, beta_opt = 0.0;
    double log2_M_at_beta_gamma = 0.0, log2_M_at_beta_opt = 0.0;
};

// n_eps1 is n^{epsilon_1}. nH is the block entropy used in the bound columns.
RangeResult range_bound(double k, double nH, double n, double epsilon, double n_eps1);
RangeResult range_bound(const ParamVector& theta, double n, double epsilon, double n_eps1);

// Lower bound on ln M at a split index beta (nats); -inf when k <= A/beta^2.
double ln_M_lower(double k, double A, double beta);

std::vector<RangeResult> region_sweep(double n, double epsilon, double n_eps1, const std::vector<double>& ks);
std::vector<double> default_region_ks(double n, double epsilon, double n_eps1, std::size_t points = 200);

// Natural-log Stirling bracket on m!.
template <class T>
struct LogBracket {
    T lo, hi;
};

template <class T>
LogBracket<T> stirling_log_bounds(T m) {
    using std::log;
    const T two_pi = T(2) * T(3.14159265358979323846264338327950288L);
    T lo = log(two_pi * m) / T(2) + m * (log(m) - T(1));
    return {lo, lo + T(1) / (T(12) * m)};
}

}  // namespace pe
