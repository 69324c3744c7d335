#include "pattern_entropy/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pattern_entropy/error.hpp"
#include "pattern_entropy/numeric.hpp"

namespace pe {

void BoundReport::add(const std::string& term, double v) {
    terms.push_back({term, v});
    Sum s;
    for (const auto& t : terms) s += t.value;
    value = static_cast<double>(s.value());
}

const Term* BoundReport::find(const std::string& term) const {
    for (const auto& t : terms)
        if (t.name == term) return &t;
    return nullptr;
}

namespace {

void check_n_eps(double n, double epsilon) {
    if (!(n >= 1.0) || !std::isfinite(n)) throw ValidationError("n must be >= 1");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in [0,1)");
}

// Sum over levels in bins lo..hi (inclusive) of count * f(level).
template <class F>
double level_sum(const ParamVector& theta, const BinStats& s, std::size_t lo, std::size_t hi, F f) {
    Sum acc;
    for (std::size_t l = 0; l < theta.levels().size(); ++l) {
        std::size_t b = s.level_bin[l];
        if (b >= lo && b <= hi) acc += static_cast<long double>(theta.levels()[l].count) * f(theta.levels()[l].p);
    }
    return static_cast<double>(acc.value());
}

double sum_log_factorials(const std::vector<std::uint64_t>& counts, std::size_t from, std::size_t to) {
    Sum acc;
    for (std::size_t b = from; b <= to && b < counts.size(); ++b) acc += log2_factorial(static_cast<double>(counts[b]));
    return static_cast<double>(acc.value());
}

// (n^2/2 S2) log2{2e phi0 ell0 / (n S2)} for bin 0.
double bin0_penalty(const BinStats& s, double n) {
    if (s.count.empty() || s.count[0] == 0) return 0.0;
    double s2 = s.sum_sq[0];
    return n * n / 2.0 * s2 * std::log2(2.0 * kE * s.phi[0] * s.ell[0] / (n * s2));
}

// (n phi - L) log2 ell + n phi h2(L / (n phi)) for a packed group.
std::pair<double, double> packing_penalty(double phi, double L, double ell, double n) {
    if (phi <= 0.0) return {0.0, 0.0};
    double ratio = std::clamp(L / (n * phi), 0.0, 1.0);
    return {(n * phi - L) * std::log2(ell), n * phi * binary_entropy(ratio)};
}

std::string regime_note(double n, double epsilon) {
    if (epsilon_in_regime(n, epsilon, 0.0)) return {};
    return "epsilon below (ln ln n)/(ln n); the asymptotic regime does not hold";
}

bool all_above(const ParamVector& theta, double threshold) { return theta.levels().front().p > threshold; }

}  // namespace

PackedEntropies packed_entropies(const ParamVector& theta, const BinStats& s) {
    PackedEntropies h;
    double tail1 = level_sum(theta, s, 1, std::numeric_limits<std::size_t>::max(), plogp);
    double tail2 = level_sum(theta, s, 2, std::numeric_limits<std::size_t>::max(), plogp);
    double phi0 = s.phi.empty() ? 0.0 : s.phi[0];
    double phi1 = s.phi.size() > 1 ? s.phi[1] : 0.0;
    h.h0 = plogp(phi0) + tail1;
    h.h01 = plogp(s.phi01) + tail2;
    h.h0_1 = plogp(phi0) + plogp(phi1) + tail2;
    return h;
}

PackedEntropies packed_entropies(const ParamVector& theta, const Grid& grid) {
    return packed_entropies(theta, bin_stats(grid, theta));
}

std::pair<BoundReport, BoundReport> simple_bounds(const ParamVector& theta, double n) {
    if (!(n >= 1.0)) throw ValidationError("n must be >= 1");
    const double nH = n * iid_entropy(theta);
    const double k = static_cast<double>(theta.size());
    BoundReport lo{"simple_lower"}, hi{"simple_upper"};
    lo.add("nH", nH);
    lo.add("-log_k!/(k-n)!", -log2_falling(k, std::min(k, n)));
    hi.add("nH", nH);
    return {lo, hi};
}

double epsilon_n(double n, double epsilon) {
    double v = std::exp(-(0.1 * std::pow(n, epsilon) - 2.0 * std::log(n)));
    return std::min(v, 1.0);
}

bool epsilon_in_regime(double n, double epsilon, double delta) {
    return epsilon >= (1.0 + delta) * std::log(std::log(n)) / std::log(n);
}

BoundReport upper_bound_ub1(const ParamVector& theta, double n, double epsilon, bool tighten) {
    check_n_eps(n, epsilon);
    Grid g = build_grid(GridKind::eta, n, epsilon);
    BinStats s = bin_stats(g, theta);
    BoundReport r{tighten ? "ub1_tight" : "ub1"};
    double coeff = 1.0 - epsilon;
    if (tighten) {
        double raw = std::exp(-(0.1 * std::pow(n, epsilon) - 2.0 * std::log(n)));
        if (raw > 1.0) r.notes.push_back("epsilon_n exceeds 1 and is clamped; no gain survives");
        coeff = 1.0 - epsilon_n(n, epsilon);
    }
    r.add("nH", n * iid_entropy(theta));
    r.add("-(1-eps)*sum_log_kb!", -coeff * sum_log_factorials(s.count, 2, g.A));
    r.residual_flags.push_back("o(k)");
    r.valid = all_above(theta, 1.0 / std::pow(n, 1.0 - epsilon));
    if (auto note = regime_note(n, epsilon); !note.empty()) r.notes.push_back(note);
    return r;
}

std::pair<BoundReport, BoundReport> lower_bound_lb2(const ParamVector& theta, double n, double epsilon) {
    check_n_eps(n, epsilon);
    Grid g = build_grid(GridKind::xi, n, epsilon);
    BinStats s = bin_stats(g, theta);
    const double nH = n * iid_entropy(theta);
    const bool valid = all_above(theta, 1.0 / std::pow(n, 1.0 - epsilon));
    BoundReport a{"lb2_a"}, b{"lb2_b"};
    a.add("nH", nH);
    a.add("-sum_log_kappa_b!", -sum_log_factorials(s.count, 1, g.A));
    a.add("-k*log3", -static_cast<double>(theta.size()) * std::log2(3.0));
    b.add("nH", nH);
    b.add("-sum_log_kappa'_b!", -sum_log_factorials(s.kappa_prime, 1, g.A));
    for (auto* r : {&a, &b}) {
        r->residual_flags.push_back("o(1)");
        r->valid = valid;
        if (auto note = regime_note(n, epsilon); !note.empty()) r->notes.push_back(note);
    }
    return {a, b};
}

Ub3Variant ub3_variant_from_string(const std::string& s) {
    if (s == "ub3") return Ub3Variant::ub3;
    if (s == "c1") return Ub3Variant::c1;
    if (s == "c21") return Ub3Variant::c21;
    if (s == "c2" || s == "c2_exact") return Ub3Variant::c2_exact;
    if (s == "c2_loosened") return Ub3Variant::c2_loosened;
    throw ValidationError("unknown ub3 variant: " + s);
}

std::string to_string(Ub3Variant v) {
    switch (v) {
        case Ub3Variant::ub3: return "ub3";
        case Ub3Variant::c1: return "c1";
        case Ub3Variant::c21: return "c21";
        case Ub3Variant::c2_exact: return "c2_exact";
        case Ub3Variant::c2_loosened: return "c2_loosened";
    }
    return "?";
}

namespace {

// log pmf of Binomial(c, p) at m.
double log_binom_pmf(double c, double m, double p) {
    double lc = std::lgamma(c + 1.0) - std::lgamma(m + 1.0) - std::lgamma(c - m + 1.0);
    double a = m > 0.0 ? m * std::log(p) : 0.0;
    double b = c - m > 0.0 ? (c - m) * std::log1p(-p) : 0.0;
    return lc + a + b;
}

std::vector<double> binomial_pmf(std::uint64_t c, double p) {
    std::vector<double> pmf(c + 1, 0.0);
    if (p >= 1.0) {
        pmf[c] = 1.0;
        return pmf;
    }
    for (std::uint64_t m = 0; m <= c; ++m)
        pmf[m] = std::exp(log_binom_pmf(static_cast<double>(c), static_cast<double>(m), p));
    return pmf;
}

}  // namespace

std::vector<double> distinct_count_pmf(const std::vector<Level>& letters, double n, std::uint64_t work_cap) {
    std::uint64_t total = 0;
    for (const auto& l : letters) total += l.count;
    if (letters.size() > 1 && static_cast<long double>(total) * total > work_cap)
        throw ResourceCapError("Poisson-binomial DP exceeds its work cap");
    if (total + 1 > work_cap) throw ResourceCapError("distinct-count distribution too large");
    std::vector<double> pmf{1.0};
    for (const auto& l : letters) {
        auto part = binomial_pmf(l.count, prob_present(l.p, n));
        if (pmf.size() == 1) {
            pmf = std::move(part);
            continue;
        }
        std::vector<long double> out(pmf.size() + part.size() - 1, 0.0L);
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            if (pmf[i] == 0.0) continue;
            for (std::size_t j = 0; j < part.size(); ++j) out[i + j] += static_cast<long double>(pmf[i]) * part[j];
        }
        pmf.assign(out.begin(), out.end());
    }
    return pmf;
}

double expected_log_falling(const std::vector<Level>& letters, double n, std::uint64_t work_cap) {
    std::uint64_t c = 0;
    for (const auto& l : letters) c += l.count;
    if (c < 2) return 0.0;
    const double cd = static_cast<double>(c);
    Sum e;
    if (letters.size() == 1) {
        // Binomial fast path; skip the negligible tails.
        double p = prob_present(letters[0].p, n);
        if (p >= 1.0) return log2_factorial(cd);
        double mean = cd * p, sd = std::sqrt(cd * p * (1.0 - p));
        double lo = std::max(0.0, std::floor(mean - 40.0 * sd - 40.0));
        double hi = std::min(cd, std::ceil(mean + 40.0 * sd + 40.0));
        for (double m = lo; m <= hi; m += 1.0)
            e += std::exp(log_binom_pmf(cd, m, p)) * log2_falling(cd, m);
        return static_cast<double>(e.value());
    }
    auto pmf = distinct_count_pmf(letters, n, work_cap);
    for (std::size_t m = 0; m < pmf.size(); ++m)
        if (pmf[m] > 0.0) e += pmf[m] * log2_falling(cd, static_cast<double>(m));
    return static_cast<double>(e.value());
}

BoundReport upper_bound_ub3(const ParamVector& theta, double n, double epsilon, Ub3Variant variant,
                               const Ub3Options& opt) {
    check_n_eps(n, epsilon);
    BoundReport r{to_string(variant)};
    if (auto note = regime_note(n, epsilon); !note.empty() &&
        (variant == Ub3Variant::ub3 || variant == Ub3Variant::c1))
        r.notes.push_back(note);

    if (variant == Ub3Variant::ub3 || variant == Ub3Variant::c1) {
        Grid g = build_grid(GridKind::eta, n, epsilon);
        BinStats s = bin_stats(g, theta);
        PackedEntropies h = packed_entropies(theta, s);
        double gain = -(1.0 - epsilon) * sum_log_factorials(s.count, 2, g.A);
        if (variant == Ub3Variant::ub3) {
            r.add("nH(0,1)", n * h.h0_1);
            r.add("-(1-eps)*sum_log_kb!", gain);
            double phi1 = s.phi.size() > 1 ? s.phi[1] : 0.0;
            auto [reoccur, h2] = packing_penalty(phi1, s.L.size() > 1 ? s.L[1] : 0.0,
                                                 s.ell.size() > 1 ? s.ell[1] : 0.0, n);
            r.add("bin1_reoccurrence", reoccur);
            r.add("bin1_h2", h2);
            r.add("bin0_penalty", bin0_penalty(s, n));
        } else {
            r.add("nH(01)", n * h.h01);
            r.add("-(1-eps)*sum_log_kb!", gain);
            auto [reoccur, h2] = packing_penalty(s.phi01, s.L01, s.ell01, n);
            r.add("bin01_reoccurrence", reoccur);
            r.add("bin01_h2", h2);
        }
        return r;
    }

    Grid g = build_grid(GridKind::tau, n, epsilon);
    BinStats s = bin_stats(g, theta);
    PackedEntropies h = packed_entropies(theta, s);
    r.add("nH(0)", n * h.h0);
    if (variant == Ub3Variant::c21) {
        r.add("bin0_penalty", bin0_penalty(s, n));
        return r;
    }
    // Letters of each tau bin, as levels.
    std::vector<std::vector<Level>> bins(g.num_bins());
    for (std::size_t l = 0; l < theta.levels().size(); ++l)
        bins[s.level_bin[l]].push_back(theta.levels()[l]);
    Sum gain;
    for (std::size_t b = 1; b <= g.A && b < bins.size(); ++b) {
        if (s.count[b] < 2) continue;
        if (variant == Ub3Variant::c2_exact) {
            gain += expected_log_falling(bins[b], n, opt.pb_work_cap);
        } else {
            double ec = s.L[b];
            gain += ec * std::log2(ec / kE);
        }
    }
    r.add(variant == Ub3Variant::c2_exact ? "-E_log_falling_cb" : "-E[C_b]log(E[C_b]/e)",
          -static_cast<double>(gain.value()));
    double crowded = 0.0;
    for (std::size_t b = 1; b < s.count.size(); ++b)
        if (s.count[b] > 1) crowded += static_cast<double>(s.count[b]);
    r.add("9log(e)/n^eps*sum_cb", 9.0 * kLog2e / std::pow(n, epsilon) * crowded);
    r.add("bin0_penalty", bin0_penalty(s, n));
    if (variant == Ub3Variant::c2_exact)
        r.notes.push_back("distinct counts use the independent-occurrence model");
    return r;
}

Lb4Constants lb4_constants(double vm, double vp) {
    if (!(vp > 1.0 && vm > 0.0 && vm < 1.0)) throw ValidationError("need vartheta+ > 1 > vartheta- > 0");
    Lb4Constants c;
    c.gamma_minus = (vm - 1.0) / std::log(vm);
    c.gamma_plus = (vp - 1.0) / std::log(vp);
    auto expo = [](double g) { return g * std::log(g / kE) + 1.0; };
    c.f = std::min(expo(c.gamma_minus), expo(c.gamma_plus));
    c.eps_prime_coeff = std::log(vm) / (2.0 * (vm - 1.0));
    return c;
}

double epsilon_prime_n(double n, double epsilon, double k_large, const Lb4Constants& c) {
    return n * k_large * std::exp(-c.f * std::pow(n, epsilon)) + c.eps_prime_coeff / std::pow(n, 1.0 + epsilon);
}

BoundReport lower_bound_lb4(const ParamVector& theta, double n, double epsilon, const Lb4Options& opt) {
    check_n_eps(n, epsilon);
    const auto consts = lb4_constants(opt.vartheta_minus, opt.vartheta_plus);
    Grid xg = build_grid(GridKind::xi, n, epsilon);
    BinStats xs = bin_stats(xg, theta);
    Grid eg = build_grid(GridKind::eta, n, epsilon);
    BinStats es = bin_stats(eg, theta);
    PackedEntropies h = packed_entropies(theta, es);

    const double low = 1.0 / std::pow(n, 1.0 - epsilon);  // xi_1 = eta_2
    const double phi01 = es.phi01;
    const std::uint64_t k01 = es.k01, k0 = es.count[0];
    const auto& levels = theta.levels();

    BoundReport r{"lb4"};
    r.add("nH(01)", n * h.h01);

    double s1;
    if (opt.s1 == S1Variant::b1)
        s1 = sum_log_factorials(xs.count, 1, xg.A) + static_cast<double>(theta.size() - xs.count[0]) * std::log2(3.0);
    else
        s1 = sum_log_factorials(xs.kappa_prime, 1, xg.A);
    r.add(opt.s1 == S1Variant::b1 ? "-S1_b1" : "-S1_b2", -s1);

    // S2: re-occurrence cost of the low letters, ascending order.
    auto bracket = [&](double t) {
        // n t - 1 + e^{-n(t+t^2)}, or n t - 1 above 3/5
        if (t > 0.6) return n * t - 1.0;
        double x = n * (t + t * t);
        double excess = std::fabs(x) < 0.1 ? x * x / 2.0 - x * x * x / 6.0 + x * x * x * x / 24.0
                                           : std::expm1(-x) + x;
        return excess - n * t * t;
    };
    Sum s2;
    if (k01 > 0) {
        const double t_last = theta[k01 - 1];
        const bool split_last = t_last > 0.6;
        std::uint64_t first = 0;
        for (const auto& lv : levels) {
            std::uint64_t a = first, b = std::min(first + lv.count, k01);  // letters [a, b)
            first += lv.count;
            if (a >= k01) break;
            double lg = std::log2(phi01 / lv.p);
            double cnt = static_cast<double>(b - a);
            bool in_bin0 = a < k0;
            if (opt.s2 == S2Variant::b2 && in_bin0) {
                s2 += (1.0 - std::pow(n, -epsilon)) * n * n / 2.0 * cnt * lv.p * lv.p * lg;
                continue;
            }
            if (split_last && b == k01) {
                s2 += (cnt - 1.0) * bracket(lv.p) * lg;
                s2 += (n * lv.p - 1.0) * lg;
            } else {
                s2 += cnt * bracket(lv.p) * lg;
            }
        }
    }
    r.add(opt.s2 == S2Variant::b1 ? "S2_b1" : "S2_b2", static_cast<double>(s2.value()));

    // S3: first-occurrence penalty, sum_{i=1}^{floor(L01)-1} (L01 - i) theta_i / phi01.
    Sum s3;
    if (k01 > 0 && phi01 > 0.0) {
        const double L = es.L01;
        const double M = std::floor(L);
        const double weight = opt.s3_double_sum ? M : L;  // nested form telescopes to (floor(L) - i)
        std::uint64_t first = 0;
        for (const auto& lv : levels) {
            double a = static_cast<double>(first) + 1.0;  // 1-based letters [a, b]
            double b = std::min(static_cast<double>(first + lv.count), M - 1.0);
            first += lv.count;
            if (a > M - 1.0) break;
            if (b < a) continue;
            double cnt = b - a + 1.0;
            double sum_i = (a + b) * cnt / 2.0;
            s3 += (weight * cnt - sum_i) * lv.p / phi01;
        }
    }
    r.add(opt.s3_double_sum ? "S3_nested" : "S3", kLog2e * static_cast<double>(s3.value()));

    // S4: uncertainty about which window letters land on each side of 1/n^{1-eps}.
    double km = 0.0, kp = 0.0, k_large = 0.0;
    for (const auto& lv : levels) {
        double c = static_cast<double>(lv.count);
        if (lv.p > opt.vartheta_minus * low && lv.p <= low) km += c;
        if (lv.p > low && lv.p <= opt.vartheta_plus * low) kp += c;
        if (lv.p > std::pow(n, -3.0)) k_large += c;
    }
    r.add("-S4", -log2_binomial(km + kp, kp));

    r.residual_flags.push_back("o(1)");
    double epn = epsilon_prime_n(n, epsilon, k_large, consts);
    r.notes.push_back("eps'_n*n=" + std::to_string(epn * n));
    if (auto note = regime_note(n, epsilon); !note.empty()) r.notes.push_back(note);
    return r;
}

std::pair<BoundReport, BoundReport> contribution_limits(const ParamVector& theta, double n, double epsilon,
                                                        std::optional<double> mu) {
    check_n_eps(n, epsilon);
    Grid g = build_grid(GridKind::eta, n, epsilon);
    BinStats s = bin_stats(g, theta);
    BoundReport p1{"contribution_part1"}, p2{"contribution_part2"};
    const double ne = std::pow(n, epsilon);
    if (s.phi01 > 0.0) {
        p1.add("n*phi01*log(ell01)", n * s.phi01 * std::log2(s.ell01));
        p1.add("phi01*n^(1-eps)*log(e*n^eps/ell01)", s.phi01 * n / ne * std::log2(kE * ne / s.ell01));
    } else {
        p1.add("n*phi01*log(ell01)", 0.0);
        p1.add("phi01*n^(1-eps)*log(e*n^eps/ell01)", 0.0);
    }
    p1.residual_flags.push_back("Theta(phi01*n^(1-eps)*e^(-n^eps))");
    for (std::size_t b = 0; b < 2 && b < s.count.size(); ++b)
        if (s.count[b] > 0 && static_cast<double>(s.count[b]) < (1.0 + epsilon) * ne)
            p1.notes.push_back("k" + std::to_string(b) + " < (1+eps)n^eps: the O(n^(2eps) log n) branch may dominate");
    p2.add("phi0*n^(1-eps)/2*log(2e*n^(1+eps))", s.phi[0] * n / ne / 2.0 * std::log2(2.0 * kE * n * ne));
    if (mu) {
        if (*mu < 1.0) throw ValidationError("part II needs mu >= 1");
        double cut = std::pow(n, -(*mu + epsilon)), phi_mu = 0.0;
        for (const auto& lv : theta.levels())
            if (lv.p <= cut) phi_mu += lv.p * static_cast<double>(lv.count);
        double scale = phi_mu / 2.0 * std::pow(n, 2.0 - *mu - epsilon) * std::log2(2.0 * kE * n * ne);
        p2.notes.push_back("mu-scale contribution (phi_0mu/2) n^(2-mu-eps) log(2e n^(1+eps)) = " +
                           std::to_string(scale));
        p2.residual_flags.push_back("O(n^(2-mu-eps) log n)");
    }
    return {p1, p2};
}

GammaSolution gamma_fixed_point(double c) {
    auto g = [c](double x) { return x - 2.0 * std::log(x - 1.0) + 3.0 * std::log(x) - c; };
    GammaSolution sol;
    if (g(2.0) > 0.0) {
        sol.gamma = 2.0;
        sol.residual = g(2.0);
        return sol;
    }
    double lo = 2.0, hi = std::max(c + 10.0, 3.0);
    int it = 0;
    while (hi - lo > 1e-13 * hi && it < 1000) {
        double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? hi : lo) = mid;
        ++it;
    }
    double x = 0.5 * (lo + hi);
    for (int j = 0; j < 5; ++j) {
        double d = 1.0 - 2.0 / (x - 1.0) + 3.0 / x;
        double nx = x - g(x) / d;
        if (nx >= 2.0) x = nx;
        ++it;
    }
    if (it >= 1000) throw ValidationError("gamma fixed point did not converge");
    sol.gamma = x;
    sol.residual = std::fabs(g(x));
    sol.iterations = it;
    sol.root_found = true;
    return sol;
}

double ln_M_lower(double k, double A, double beta) {
    double rest = k - A / (beta * beta);
    if (!(rest > 0.0)) return -std::numeric_limits<double>::infinity();
    return rest * std::log(rest / (kE * beta)) + beta / 2.0 * std::log(2.0 * kPi * rest / beta);
}

RangeResult range_bound(double k, double nH, double n, double epsilon, double n_eps1) {
    if (!(k >= 1.0)) throw ValidationError("k must be >= 1");
    if (!(n > 1.0)) throw ValidationError("n must be > 1");
    if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be >= 0");
    RangeResult r;
    r.k = k;
    const double A = std::pow(n, 1.0 + epsilon);
    r.threshold = std::pow(n, 1.0 / 3.0 + epsilon);
    r.above_threshold = k >= r.threshold;

    r.decrease_lower = log2_factorial(k);
    r.decrease_lower_stirling = static_cast<double>(stirling_log_bounds<long double>(k).lo) * kLog2e;
    r.decrease_asymptotic_formula = 1.5 * k * std::log2(k / (kE * std::pow(n, 1.0 / 3.0 + epsilon / 2.0)));
    r.decrease_asymptotic = r.above_threshold ? r.decrease_asymptotic_formula : 0.0;

    const double ratio = 3.0 * std::log(k) - std::log(A);  // ln(k^3/A)
    double factor = 1.0 - k * std::exp(-n_eps1);
    double main = 1.5 * k * std::log2(k / (kE * std::pow(n, 1.0 / 3.0 + epsilon / 3.0)));
    double loglog = ratio > 0.0 ? k / 2.0 * (1.0 - 1.0 / ratio) * std::log2(std::log(ratio > 1.0 ? ratio : 1.0)) : 0.0;
    double penalty = 9.0 * k * kLog2e / std::pow(n, epsilon);
    r.decrease_nonasymptotic_raw = factor * (main - loglog) - penalty;
    r.decrease_nonasymptotic = r.above_threshold ? std::max(0.0, r.decrease_nonasymptotic_raw) : 0.0;

    r.gamma = gamma_fixed_point(1.0 + ratio);
    r.beta_gamma = std::sqrt(r.gamma.gamma * A / k);
    r.beta_opt = ratio > 0.0 ? std::sqrt(A / k * ratio) : 0.0;
    r.log2_M_at_beta_gamma = ln_M_lower(k, A, r.beta_gamma) * kLog2e;
    r.log2_M_at_beta_opt = r.beta_opt > 0.0 ? ln_M_lower(k, A, r.beta_opt) * kLog2e : 0.0;

    r.lower = BoundReport{"range_lower"};
    r.lower.add("nH", nH);
    r.lower.add("-log_k!", -r.decrease_lower);

    r.upper_asymptotic = BoundReport{"range_upper_asymptotic"};
    r.upper_asymptotic.add("nH", nH);
    r.upper_asymptotic.add("-1.5k*log(k/(e*n^(1/3+eps/2)))", -r.decrease_asymptotic);
    r.upper_asymptotic.valid = r.above_threshold;

    r.upper_nonasymptotic = BoundReport{"range_upper_nonasymptotic"};
    r.upper_nonasymptotic.add("nH", nH);
    if (r.above_threshold) {
        r.upper_nonasymptotic.add("-(1-k*e^(-n^eps1))*M_term", -factor * (main - loglog));
        r.upper_nonasymptotic.add("9k*log(e)/n^eps", penalty);
        r.upper_nonasymptotic.add("clamp", r.decrease_nonasymptotic - (factor * (main - loglog) - penalty));
    }
    r.upper_nonasymptotic.valid = r.above_threshold;
    for (auto* b : {&r.upper_asymptotic, &r.upper_nonasymptotic}) {
        if (!r.above_threshold) b->notes.push_back("k below n^(1/3+eps): no decrease claimed");
        if (factor <= 0.0) b->notes.push_back("k e^(-n^eps1) >= 1: occurrence factor non-positive");
    }
    if (!r.gamma.root_found) r.upper_nonasymptotic.notes.push_back("gamma fixed point has no root >= 2");
    return r;
}

RangeResult range_bound(const ParamVector& theta, double n, double epsilon, double n_eps1) {
    RangeResult r = range_bound(static_cast<double>(theta.size()), n * iid_entropy(theta), n, epsilon, n_eps1);
    bool letters_ok = theta.levels().front().p > n_eps1 / n;
    for (auto* b : {&r.lower, &r.upper_asymptotic, &r.upper_nonasymptotic}) {
        if (!letters_ok) {
            b->valid = false;
            b->notes.push_back("some theta_i <= 1/n^(1-eps1)");
        }
    }
    return r;
}

std::vector<RangeResult> region_sweep(double n, double epsilon, double n_eps1, const std::vector<double>& ks) {
    std::vector<RangeResult> out;
    out.reserve(ks.size());
    for (double k : ks) out.push_back(range_bound(k, n * std::log2(k), n, epsilon, n_eps1));
    return out;
}

std::vector<double> default_region_ks(double n, double epsilon, double n_eps1, std::size_t points) {
    // Up to the largest alphabet whose letters can all exceed 1/n^{1-eps1}.
    double kmax = std::floor(n / n_eps1);
    double kmin = 2.0;
    std::vector<double> ks;
    for (std::size_t i = 0; i < points; ++i) {
        double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        ks.push_back(std::round(std::exp(std::log(kmin) + t * (std::log(kmax) - std::log(kmin)))));
    }
    ks.push_back(std::pow(n, 1.0 / 3.0 + epsilon));
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    return ks;
}

}  // namespace pe
