#include "pattern_entropy/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "pattern_entropy/bounds.hpp"
#include "pattern_entropy/coder.hpp"
#include "pattern_entropy/error.hpp"
#include "pattern_entropy/grids.hpp"
#include "pattern_entropy/numeric.hpp"
#include "pattern_entropy/oracle.hpp"
#include "pattern_entropy/patterns.hpp"

namespace pe {

namespace {

constexpr double kOracleEpsilon = 0.25;

class Checker {
public:
    explicit Checker(SuiteResult& r) : r_(r) {}
    bool operator()(bool ok, const std::string& what) {
        ++r_.checks;
        if (!ok) {
            ++r_.failures;
            if (r_.messages.size() < 20) r_.messages.push_back(what);
        }
        return ok;
    }
    void note(const std::string& s) { r_.messages.push_back(s); }

private:
    SuiteResult& r_;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

std::string describe(const OracleInstance& inst) {
    std::ostringstream os;
    os.precision(6);
    os << "n=" << inst.n << " theta=(";
    auto t = inst.theta.expand();
    for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t[i];
    os << ")";
    return os.str();
}

Grid oracle_grid(std::size_t n) { return build_grid(GridKind::eta, std::max<double>(n, 2.0), kOracleEpsilon); }

void sandwich(SuiteResult& r, std::uint64_t seed) {
    Checker check(r);
    for (const auto& inst : oracle_matrix(seed)) {
        auto ex = exact_entropies(inst.theta, oracle_grid(inst.n), inst.n);
        auto [lo, hi] = simple_bounds(inst.theta, static_cast<double>(inst.n));
        check(lo.value <= ex.h_pattern + 1e-9, "lower " + fmt(lo.value) + " > H " + fmt(ex.h_pattern) + " at " + describe(inst));
        check(ex.h_pattern <= hi.value + 1e-9, "H " + fmt(ex.h_pattern) + " > upper " + fmt(hi.value) + " at " + describe(inst));
        check(std::fabs(ex.h_pattern - ex.h_pattern_grouped) <= 1e-9, "pattern routes disagree at " + describe(inst));
    }
}

void coder_dominance(SuiteResult& r, std::uint64_t seed) {
    Checker check(r);
    for (const auto& inst : oracle_matrix(seed)) {
        if (inst.n > 6) continue;
        Grid g = oracle_grid(inst.n);
        auto ex = exact_entropies(inst.theta, g, inst.n);
        auto pre = expected_codelength_by_prefix(inst.theta, g, inst.n);
        const std::string at = " at " + describe(inst);
        check(ex.expected_codelength >= ex.h_joint - 1e-9,
              "E[-log Q] " + fmt(ex.expected_codelength) + " < H(Psi,B) " + fmt(ex.h_joint) + at);
        check(ex.h_joint >= ex.h_pattern - 1e-9, "H(Psi,B) < H(Psi)" + at);
        check(std::fabs(ex.expected_codelength - pre.expected_codelength) <= 1e-9,
              "E[-log Q] routes differ: " + fmt(ex.expected_codelength) + " vs " + fmt(pre.expected_codelength) + at);
        check(std::fabs(ex.h_joint - pre.h_joint) <= 1e-9, "H(Psi,B) routes differ" + at);
        auto model = make_coder_model(inst.theta, g);
        auto dec = codelength_decomposition(model, inst.theta, ex.distinct_pmf);
        check(std::fabs(dec.total() - ex.expected_codelength) <= 1e-6,
              "decomposition " + fmt(dec.total()) + " vs " + fmt(ex.expected_codelength) + at);
    }
}

void permutation_count(SuiteResult& r, std::uint64_t seed) {
    Checker check(r);
    std::mt19937_64 rng(seed);
    for (int t = 0; t < 100; ++t) {
        std::size_t k = 1 + rng() % 7;
        std::uint32_t bins = 1 + rng() % 4;
        std::vector<std::uint32_t> bin_of(k);
        for (auto& b : bin_of) b = rng() % bins;
        auto brute = brute_force_permutation_count(bin_of);
        auto prod = product_of_factorials(bin_of);
        check(brute == prod, "count " + std::to_string(brute) + " != " + std::to_string(prod));
    }
}

void occurrence(SuiteResult& r, std::uint64_t seed) {
    Checker check(r);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto le = [](double a, double b) { return a <= b + 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)}); };
    for (int t = 0; t < 10000; ++t) {
        double theta = std::pow(10.0, -7.0 * u(rng));
        double n = std::floor(std::pow(10.0, 5.0 * u(rng)));
        auto o = occurrence_stats(theta, n);
        std::string at = " at theta=" + fmt(theta) + " n=" + fmt(n);
        check(le(o.p_absent_lo, o.p_absent) && le(o.p_absent, o.p_absent_hi), "P(absent) outside bounds" + at);
        check(le(o.p_present_lo, o.p_present) && le(o.p_present, o.p_present_hi), "P(present) outside bounds" + at);
        check(le(o.mean_reoccur_lo, o.mean_reoccur) && le(o.mean_reoccur, o.mean_reoccur_hi),
              "mean re-occurrence outside bounds" + at);
        double direct = n * theta - 1.0 + std::pow(1.0 - theta, n);
        check(std::fabs(o.mean_reoccur - direct) <= 1e-9 * std::max(1.0, n * theta), "mean re-occurrence identity" + at);
        if (o.binomial_refined)
            check(le(o.binom_reoccur_lo, o.mean_reoccur) && le(o.mean_reoccur, o.binom_reoccur_hi),
                  "binomial refinement outside bounds" + at);
    }
    for (double theta : {0.61, 0.99}) {
        for (double n : {1.0, 2.0, 3.0, 10.0}) {
            auto o = occurrence_stats(theta, n);
            std::string at = " at theta=" + fmt(theta) + " n=" + fmt(n);
            check(o.p_absent_lo == 0.0, "lower bound not zeroed above 3/5" + at);
            check(o.p_absent <= o.p_absent_hi, "upper bound fails above 3/5" + at);
            check(le(o.p_present_lo, o.p_present) && le(o.p_present, o.p_present_hi), "P(present) above 3/5" + at);
            check(le(o.mean_reoccur_lo, o.mean_reoccur) && le(o.mean_reoccur, o.mean_reoccur_hi),
                  "mean re-occurrence above 3/5" + at);
        }
    }
    auto o = occurrence_stats(0.99, 1.0);
    check(std::exp(-(0.99 + 0.99 * 0.99)) > o.p_absent, "unbranched lower bound would hold at 0.99");
}

void grid_laws(SuiteResult& r, std::uint64_t) {
    Checker check(r);
    for (double n : {1e2, 1e4, 1e6}) {
        for (double eps : {0.1, 0.25}) {
            for (GridKind kind : {GridKind::tau, GridKind::eta, GridKind::xi}) {
                Grid g = build_grid(kind, n, eps);
                std::string at = " on " + to_string(kind) + " n=" + fmt(n) + " eps=" + fmt(eps);
                check(g.B == closed_form_B(kind, n, eps), "B mismatch" + at);
                check(g.A == closed_form_A(kind, n, eps), "A mismatch" + at);
                const auto& p = g.points;
                const double denom = std::pow(n, g.scale());
                auto rel = [](double a, double b) { return std::fabs(a - b) <= 1e-9 * std::fabs(b); };
                bool ok_id = true, ok_ineq = true;
                const std::size_t first = kind == GridKind::eta ? 2 : 1;
                for (std::size_t b = first; b + 1 < p.size(); ++b) {
                    double gap = p[b + 1] - p[b];
                    bool regular = b + 1 <= g.B;
                    if (kind == GridKind::xi) {
                        if (regular && gap < 2.0 * std::sqrt(p[b]) / std::sqrt(denom) * (1 - 1e-12)) ok_ineq = false;
                        if (regular && !rel(gap, (2.0 * b + 1.0) / denom)) ok_id = false;
                        continue;
                    }
                    double j = kind == GridKind::eta ? static_cast<double>(b + g.shift_D) - 2.0 : static_cast<double>(b);
                    // eta_2 is not on the shifted square lattice, so the identity starts at b = 3.
                    bool lattice = kind != GridKind::eta || b >= 3;
                    if (regular && lattice && !rel(gap, (2.0 * j + 1.0) / denom)) ok_id = false;
                    if (gap > 3.0 * std::sqrt(p[b]) / std::sqrt(denom) * (1 + 1e-12)) ok_ineq = false;
                }
                check(ok_id, "spacing identity fails" + at);
                check(ok_ineq, "spacing inequality fails" + at);
            }
        }
    }
}

void mc(SuiteResult& r, std::uint64_t seed) {
    Checker check(r);
    auto theta = ParamVector::from_levels({{1.0 / 3.0, 3}});
    auto ex = exact_entropies(theta, oracle_grid(10), 10);
    check(ex.sequences == 59049, "enumerated " + std::to_string(ex.sequences) + " sequences");
    auto est = mc_pattern_entropy(theta, 10, 100000, seed);
    check(std::fabs(est.estimate - ex.h_pattern) <= 3.0 * est.standard_error,
          "MC " + fmt(est.estimate) + " vs exact " + fmt(ex.h_pattern) + " se " + fmt(est.standard_error));
    r.messages.push_back("exact " + fmt(ex.h_pattern) + " mc " + fmt(est.estimate) + " se " + fmt(est.standard_error));
}

void stirling(SuiteResult& r, std::uint64_t) {
    using big = boost::multiprecision::cpp_bin_float_50;
    Checker check(r);
    for (int m = 1; m <= 10000; ++m) {
        big exact = boost::math::lgamma(big(m + 1));
        auto br = stirling_log_bounds<big>(big(m));
        big slack = big(1) / (big(12) * big(m));
        check(br.lo <= exact && exact <= br.lo + slack && br.hi == br.lo + slack,
              "bracket fails at m=" + std::to_string(m));
    }
}

void degenerate_collapse(SuiteResult& r, std::uint64_t seed) {
    Checker check(r);
    std::vector<std::pair<ParamVector, double>> cases;
    cases.push_back({ParamVector::from_levels({{0.1, 10}}), 1000.0});
    cases.push_back({ParamVector::from_levels({{0.001, 1000}}), 1e6});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(1.0, 3.0);
    for (int t = 0; t < 8; ++t) {
        std::vector<double> w(2 + t * 3);
        for (auto& x : w) x = u(rng);
        double s = 0;
        for (double x : w) s += x;
        for (auto& x : w) x /= s;
        cases.push_back({ParamVector::from_probs(w), 1e4});
    }
    for (const auto& [theta, n] : cases) {
        const double eps = 0.25;
        auto g = build_grid(GridKind::eta, n, eps);
        auto st = bin_stats(g, theta);
        std::string at = " at k=" + std::to_string(theta.size()) + " n=" + fmt(n);
        if (!check(st.k01 == 0, "instance has low letters" + at)) continue;
        auto u1 = upper_bound_ub1(theta, n, eps);
        auto u3 = upper_bound_ub3(theta, n, eps, Ub3Variant::ub3);
        auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)); };
        check(close(u3.terms[0].value, u1.terms[0].value), "nH term differs" + at);
        check(close(u3.terms[1].value, u1.terms[1].value), "permutation term differs" + at);
        for (std::size_t i = 2; i < u3.terms.size(); ++i)
            check(close(u3.terms[i].value, 0.0), u3.terms[i].name + " nonzero" + at);
        check(close(u3.value, u1.value), "totals differ" + at);
        auto l4 = lower_bound_lb4(theta, n, eps);
        for (const auto& t : l4.terms)
            if (t.name.rfind("S2", 0) == 0 || t.name.rfind("S3", 0) == 0)
                check(t.value == 0.0, t.name + " = " + fmt(t.value) + at);
    }
}

// Leading expressions of the displayed example bounds, in bits.
struct ExampleCheck {
    std::string label;
    Ub3Variant variant;
    double expected;
};

void examples(SuiteResult& r, std::uint64_t) {
    Checker check(r);
    const double n = 1e6, eps = 0.45, nu = 0.4, mu = 0.5, phi0 = 0.5, phi1 = 1.0 - phi0;
    const double lg = std::log2(n), log2e = kLog2e;
    auto h2 = [](double a) { return binary_entropy(a); };

    auto evaluate = [&](const std::string& name, const ParamVector& theta, const std::vector<ExampleCheck>& want,
                        const std::vector<Ub3Variant>& order) {
        std::map<Ub3Variant, double> got;
        for (auto v : {Ub3Variant::ub3, Ub3Variant::c1, Ub3Variant::c21, Ub3Variant::c2_loosened})
            got[v] = upper_bound_ub3(theta, n, eps, v).value;
        for (const auto& w : want) {
            double rel = std::fabs(got[w.variant] - w.expected) / std::fabs(w.expected);
            check(rel <= 0.05, name + " " + w.label + ": " + fmt(got[w.variant]) + " vs " + fmt(w.expected));
            r.messages.push_back(name + " " + w.label + " rel " + fmt(rel));
        }
        bool ordered = true;
        for (std::size_t i = 0; i + 1 < order.size(); ++i) ordered = ordered && got[order[i]] < got[order[i + 1]];
        std::string seq;
        for (auto v : order) seq += (seq.empty() ? "" : " < ") + to_string(v);
        check(ordered, name + " ordering " + seq + " violated");
    };

    {
        SourceSpec s;
        s.family = Family::uniform;
        s.n = n;
        s.nu = nu;
        auto theta = make_distribution(s).theta;
        double k = std::pow(n, 1.0 - nu);
        double lead = n * std::log2(k);
        evaluate("example1", theta,
                 {{"ub3", Ub3Variant::ub3, lead - k * (std::log2(std::pow(n, 1.0 - 2.0 * nu)) - log2e)},
                  {"c1", Ub3Variant::c1, lead - k * (std::log2(std::pow(n, 1.0 - 2.0 * nu)) - log2e)},
                  {"c21", Ub3Variant::c21, lead},
                  {"c2_loosened", Ub3Variant::c2_loosened, lead - k * (std::log2(k) - log2e)}},
                 {Ub3Variant::c2_loosened, Ub3Variant::ub3, Ub3Variant::c21});
    }
    auto two_level = [&](double nu2) {
        SourceSpec s;
        s.family = Family::two_level;
        s.n = n;
        s.nu = nu2;
        s.mu = mu;
        s.phi0 = phi0;
        return make_distribution(s).theta;
    };
    {
        double lead = (1.0 - nu) * n * phi1 * lg - n * phi0 * std::log2(phi0);
        evaluate("example2", two_level(nu),
                 {{"ub3", Ub3Variant::ub3, lead},
                  {"c2_loosened", Ub3Variant::c2_loosened, lead},
                  {"c21", Ub3Variant::c21, lead},
                  {"c1", Ub3Variant::c1, n * phi1 * lg + n * h2(phi0)}},
                 {Ub3Variant::ub3, Ub3Variant::c1});
        // c1 loosest
        auto theta = two_level(nu);
        double c1 = upper_bound_ub3(theta, n, eps, Ub3Variant::c1).value;
        for (auto v : {Ub3Variant::ub3, Ub3Variant::c21, Ub3Variant::c2_loosened})
            check(upper_bound_ub3(theta, n, eps, v).value < c1, "example2 c1 not loosest vs " + to_string(v));
    }
    {
        evaluate("example3", two_level(-nu), {{"ub3", Ub3Variant::ub3, n * h2(phi0)}},
                 {Ub3Variant::c1, Ub3Variant::ub3, Ub3Variant::c2_loosened, Ub3Variant::c21});
    }
    {
        const double e = kE;
        double a = n * phi1 / e * lg;
        evaluate("example4", two_level(0.0),
                 {{"ub3", Ub3Variant::ub3,
                   a + n * (h2(phi0) + phi1 * h2(1.0 / e) + phi1 / e * std::log2(phi1))},
                  {"c1", Ub3Variant::c1, a + n * h2(phi1 / e)},
                  {"c21", Ub3Variant::c21, n * phi1 * lg - n * phi0 * std::log2(phi0)},
                  {"c2_loosened", Ub3Variant::c2_loosened,
                   a + n * (h2(phi0) + phi1 / e * std::log2(phi1 * (1.0 - 1.0 / e) / e) +
                            phi1 * std::log2(e / (1.0 - 1.0 / e)))}},
                 {Ub3Variant::c1, Ub3Variant::ub3, Ub3Variant::c2_loosened, Ub3Variant::c21});
    }
}

void region(SuiteResult& r, std::uint64_t) {
    Checker check(r);
    {
        const double n = 1e6, eps = 0.2, n_eps1 = 20.0;
        auto rows = region_sweep(n, eps, n_eps1, default_region_ks(n, eps, n_eps1));
        double prev = 0.0;
        std::size_t nonpositive = 0;
        double worst_k = 0.0, worst = 0.0;
        bool increasing = true;
        for (const auto& row : rows) {
            if (row.gamma.root_found)
                check(std::fabs(row.gamma.residual) < 1e-9, "gamma residual " + fmt(row.gamma.residual) + " at k=" + fmt(row.k));
            else
                check(!row.above_threshold, "no gamma root above threshold at k=" + fmt(row.k));
            if (row.k < row.threshold) {
                check(row.decrease_nonasymptotic == 0.0, "decrease not clamped below threshold at k=" + fmt(row.k));
                continue;
            }
            if (row.decrease_nonasymptotic <= 0.0) {
                ++nonpositive;
                if (row.decrease_nonasymptotic_raw < worst) worst = row.decrease_nonasymptotic_raw, worst_k = row.k;
            }
            if (row.decrease_nonasymptotic < prev) increasing = false;
            prev = row.decrease_nonasymptotic;
        }
        check(nonpositive == 0, "non-asymptotic decrease not positive at " + std::to_string(nonpositive) +
                                    " sweep points at or above the threshold (raw " + fmt(worst) + " at k=" + fmt(worst_k) + ")");
        check(increasing, "non-asymptotic decrease not increasing above the threshold");
    }
    {
        const double n = 1e50, eps = 0.1, n_eps1 = 1000.0;
        const double thr = std::pow(n, 1.0 / 3.0 + eps);
        double worst_dec = 0.0, worst_bound = 0.0, worst_k = 0.0;
        for (double f = 10.0; f <= 1e12; f *= 10.0) {
            double k = f * thr;
            auto row = range_bound(k, n * std::log2(k), n, eps, n_eps1);
            check(std::fabs(row.gamma.residual) < 1e-9, "gamma residual at k=" + fmt(k));
            double gap = std::fabs(row.decrease_asymptotic - row.decrease_nonasymptotic) / row.decrease_asymptotic;
            // Relative to the bound itself; nH dominates, so form the difference directly.
            double bound_gap = std::fabs(row.decrease_asymptotic - row.decrease_nonasymptotic) / (n * std::log2(k));
            if (gap > worst_dec) worst_dec = gap, worst_k = f;
            worst_bound = std::max(worst_bound, bound_gap);
            check(gap <= 0.01, "decrease gap " + fmt(100 * gap) + "% at " + fmt(f) + "x threshold");
        }
        r.messages.push_back("n=1e50: worst decrease gap " + fmt(100 * worst_dec) + "% at " + fmt(worst_k) +
                             "x threshold; worst bound-level gap " + fmt(worst_bound));
    }
}

void roundtrip(SuiteResult& r, std::uint64_t seed) {
    Checker check(r);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::size_t zero_prob = 0;
    for (int t = 0; t < 1000; ++t) {
        std::size_t k = 1 + rng() % 8, n = 1 + rng() % 64;
        std::vector<double> w(k);
        double s = 0;
        for (auto& x : w) s += (x = u(rng));
        for (auto& x : w) x /= s;
        auto theta = ParamVector::from_probs(w);
        auto model = make_coder_model(theta, std::max<double>(n, 2.0), kOracleEpsilon);
        auto x = sample_sequence(theta, n, rng());
        auto psi = extract_pattern(x);
        auto beta = bin_sequence(theta, model.grid, x);
        auto len = sequence_codelength(model, psi, beta);
        std::string at = " at trial " + std::to_string(t) + " n=" + std::to_string(n) + " k=" + std::to_string(k);
        if (len.zero_step) {
            ++zero_prob;
            check(false, "sequence has zero probability under Q" + at);
            continue;
        }
        try {
            auto bits = encode(model, psi, beta);
            auto [psi2, beta2] = decode(model, bits, n);
            check(psi2 == psi && beta2 == beta, "decode(encode) differs" + at);
            double L = static_cast<double>(bits.bit_count);
            check(L >= len.bits - 1e-9 && L <= len.bits + 2.0,
                  "length " + fmt(L) + " outside [" + fmt(len.bits) + ", +2]" + at);
        } catch (const std::exception& e) {
            check(false, std::string("coder threw: ") + e.what() + at);
        }
    }
    if (zero_prob) r.messages.push_back(std::to_string(zero_prob) + " sequences with zero probability");
}

struct SuiteDef {
    const char* name;
    int criterion;
    double time_limit;
    void (*run)(SuiteResult&, std::uint64_t);
};

const SuiteDef kSuites[] = {
    {"sandwich", 1, 10.0, sandwich},
    {"coder_dominance", 2, 60.0, coder_dominance},
    {"permutation_count", 3, 0.0, permutation_count},
    {"occurrence", 4, 0.0, occurrence},
    {"grid_laws", 5, 0.0, grid_laws},
    {"mc", 6, 30.0, mc},
    {"stirling", 7, 0.0, stirling},
    {"degenerate_collapse", 8, 0.0, degenerate_collapse},
    {"examples", 9, 5.0, examples},
    {"region", 10, 0.0, region},
    {"roundtrip", 11, 0.0, roundtrip},
};

}  // namespace

std::vector<OracleInstance> oracle_matrix(std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<OracleInstance> out;
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t n = 2 + i % 6, k = 1 + (i / 6) % 4;
        std::vector<double> w(k);
        double s = 0;
        for (auto& x : w) s += (x = u(rng));
        for (auto& x : w) x /= s;
        out.push_back({ParamVector::from_probs(w), n});
    }
    return out;
}

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& s : kSuites) v.push_back(s.name);
        return v;
    }();
    return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed) {
    for (const auto& s : kSuites) {
        if (name != s.name) continue;
        SuiteResult r;
        r.name = s.name;
        r.criterion = s.criterion;
        r.time_limit = s.time_limit;
        auto t0 = std::chrono::steady_clock::now();
        try {
            s.run(r, seed);
        } catch (const std::exception& e) {
            ++r.failures;
            r.messages.push_back(std::string("exception: ") + e.what());
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (r.time_limit > 0.0 && r.seconds > r.time_limit) {
            ++r.failures;
            r.messages.push_back("runtime " + fmt(r.seconds) + " s exceeds " + fmt(r.time_limit) + " s");
        }
        r.passed = r.failures == 0;
        return r;
    }
    throw ValidationError("unknown suite: " + name);
}

}  // namespace pe
