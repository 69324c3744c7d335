#include "pattern_entropy/grids.hpp"

#include <algorithm>
#include <cmath>

#include "pattern_entropy/error.hpp"
#include "pattern_entropy/numeric.hpp"

namespace pe {

GridKind grid_kind_from_string(const std::string& s) {
    if (s == "tau") return GridKind::tau;
    if (s == "eta") return GridKind::eta;
    if (s == "xi") return GridKind::xi;
    throw ValidationError("unknown grid kind: " + s);
}

std::string to_string(GridKind k) {
    switch (k) {
        case GridKind::tau: return "tau";
        case GridKind::eta: return "eta";
        case GridKind::xi: return "xi";
    }
    return "?";
}

double Grid::scale() const {
    switch (kind) {
        case GridKind::tau: return 1.0 + epsilon;
        case GridKind::eta: return 1.0 + 2.0 * epsilon;
        case GridKind::xi: return 1.0 - epsilon;
    }
    return 1.0;
}

namespace {

void check_args(double n, double epsilon) {
    if (!(n >= 2.0) || !std::isfinite(n)) throw ValidationError("grid needs n >= 2");
    if (!(epsilon >= 0.0)) throw ValidationError("grid needs epsilon >= 0");
    if (!(epsilon < 1.0)) throw ValidationError("grid needs epsilon < 1");
}

double exponent_of(GridKind kind, double epsilon) {
    switch (kind) {
        case GridKind::tau: return 1.0 + epsilon;
        case GridKind::eta: return 1.0 + 2.0 * epsilon;
        case GridKind::xi: return 1.0 - epsilon;
    }
    return 1.0;
}

std::uint64_t eta_shift(double n, double epsilon) {
    return static_cast<std::uint64_t>(robust_floor(std::pow(n, 1.5 * epsilon)));
}

}  // namespace

std::size_t closed_form_B(GridKind kind, double n, double epsilon) {
    double root = std::pow(n, exponent_of(kind, epsilon) / 2.0);
    double b = robust_floor(root);
    if (kind == GridKind::eta) b = b - static_cast<double>(eta_shift(n, epsilon)) + 2.0;
    return static_cast<std::size_t>(b);
}

std::size_t closed_form_A(GridKind kind, double n, double epsilon) {
    double root = std::pow(n, exponent_of(kind, epsilon) / 2.0) / std::sqrt(2.0);
    double a = robust_floor(root);
    if (kind == GridKind::eta) a = a - static_cast<double>(eta_shift(n, epsilon)) + 2.0;
    return static_cast<std::size_t>(std::max(a, 0.0));
}

Grid build_grid(GridKind kind, double n, double epsilon) {
    check_args(n, epsilon);
    Grid g;
    g.kind = kind;
    g.n = n;
    g.epsilon = epsilon;
    const double denom = std::pow(n, exponent_of(kind, epsilon));
    g.points.push_back(0.0);

    if (kind == GridKind::eta) {
        if (!(epsilon > 0.0)) throw ValidationError("eta grid needs epsilon > 0");
        g.shift_D = eta_shift(n, epsilon);
        g.spacing_d = static_cast<std::int64_t>(robust_floor(std::pow(n, epsilon / 2.0))) - 1;
        g.points.push_back(1.0 / std::pow(n, 1.0 + epsilon));
        g.points.push_back(1.0 / std::pow(n, 1.0 - epsilon));
        std::uint64_t j = 3 + g.shift_D - 2;
        for (;; ++j) {
            double jj = static_cast<double>(j);
            double p = jj * jj / denom;
            if (p > 1.0) break;
            if (p <= g.points.back()) {
                // Only reachable if the shift overtakes eta_2; keep the grid monotone.
                g.flags.push_back("eta_collision_merged");
                continue;
            }
            g.points.push_back(p);
        }
    } else {
        for (std::uint64_t b = 1;; ++b) {
            double bb = static_cast<double>(b);
            double p = bb * bb / denom;
            if (p > 1.0) break;
            g.points.push_back(p);
        }
    }
    g.B = g.points.size() - 1;
    if (g.points.back() == 1.0) {
        g.terminal_coincides = true;
        g.flags.push_back("terminal_point_coincides");
    } else {
        g.points.push_back(1.0);
    }
    g.A = 0;
    for (std::size_t b = 1; b <= g.B; ++b)
        if (g.points[b] <= 0.5) g.A = b;
    if (kind == GridKind::eta && g.shift_D < 2) g.flags.push_back("eta_shift_below_2");
    return g;
}

std::size_t bin_index(const Grid& grid, double theta) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("theta outside (0,1]");
    auto it = std::lower_bound(grid.points.begin(), grid.points.end(), theta);
    return static_cast<std::size_t>(it - grid.points.begin()) - 1;
}

BinStats bin_stats(const Grid& grid, const ParamVector& theta) {
    const std::size_t nb = grid.num_bins();
    const double n = grid.n;
    BinStats s;
    s.count.assign(nb, 0);
    s.phi.assign(nb, 0.0);
    s.ell.assign(nb, 0.0);
    s.L.assign(nb, 0.0);
    s.L_lo.assign(nb, 0.0);
    s.L_hi.assign(nb, 0.0);
    s.sum_sq.assign(nb, 0.0);
    s.sum_cube.assign(nb, 0.0);
    std::vector<Sum> phi(nb), L(nb), lo(nb), hi(nb), sq(nb), cube(nb);
    Sum total;
    for (const auto& lv : theta.levels()) {
        std::size_t b = bin_index(grid, lv.p);
        s.level_bin.push_back(b);
        const long double c = static_cast<long double>(lv.count);
        s.count[b] += lv.count;
        phi[b] += c * lv.p;
        double present = prob_present(lv.p, n);
        L[b] += c * present;
        total += c * present;
        lo[b] += c * -std::expm1(-n * lv.p);
        hi[b] += lv.p <= 0.6 ? c * -std::expm1(-n * (lv.p + lv.p * lv.p)) : c;
        sq[b] += c * lv.p * lv.p;
        cube[b] += c * lv.p * lv.p * lv.p;
    }
    for (std::size_t b = 0; b < nb; ++b) {
        s.phi[b] = static_cast<double>(phi[b].value());
        s.L[b] = static_cast<double>(L[b].value());
        s.L_lo[b] = static_cast<double>(lo[b].value());
        s.L_hi[b] = static_cast<double>(hi[b].value());
        s.sum_sq[b] = static_cast<double>(sq[b].value());
        s.sum_cube[b] = static_cast<double>(cube[b].value());
        s.ell[b] = std::min(static_cast<double>(s.count[b]), std::floor(n));
    }
    s.L_total = static_cast<double>(total.value());

    if (grid.kind == GridKind::xi) {
        s.kappa_prime.assign(nb, 0);
        for (std::size_t b = 0; b < nb; ++b) {
            if (s.count[b] == 0) continue;
            if (b == 0) {
                s.kappa_prime[b] = s.count[0];
                continue;
            }
            std::uint64_t c = s.count[b];
            if (b >= 2) c += s.count[b - 1];
            if (b + 1 < nb) c += s.count[b + 1];
            s.kappa_prime[b] = c;
        }
    }

    if (nb >= 2) {
        s.k01 = s.count[0] + s.count[1];
        s.phi01 = static_cast<double>(phi[0].value() + phi[1].value());
        s.L01 = s.L[0] + s.L[1];
    } else {
        s.k01 = s.count[0];
        s.phi01 = s.phi[0];
        s.L01 = s.L[0];
    }
    s.ell01 = std::min(static_cast<double>(s.k01), std::floor(n));
    return s;
}

namespace {

// e^{-x} - 1 + x, accurate for small x.
double exp_excess(double x) {
    if (std::fabs(x) < 0.1) {
        double term = x * x / 2.0, sum = 0.0;
        for (int j = 2; j < 30 && term != 0.0; ++j) {
            sum += term;
            term *= -x / (j + 1);
        }
        return sum;
    }
    return std::expm1(-x) + x;
}

}  // namespace

double mean_reoccurrences(double theta, double n) {
    if (theta >= 1.0) return n - 1.0;
    if (n * theta < 0.1) {
        // sum_{j>=2} C(n,j) (-theta)^j
        double term = n * (n - 1.0) / 2.0 * theta * theta, sum = 0.0;
        for (int j = 2; j < 60 && term != 0.0; ++j) {
            sum += term;
            if (n - j <= 0.0) break;
            term *= -theta * (n - j) / (j + 1);
        }
        return sum;
    }
    return n * theta - prob_present(theta, n);
}

OccurrenceStats occurrence_stats(double theta, double n) {
    if (!(theta > 0.0 && theta <= 1.0)) throw ValidationError("theta outside (0,1]");
    if (!(n >= 1.0)) throw ValidationError("n must be >= 1");
    OccurrenceStats o;
    const bool small = theta <= 0.6;
    const double x_hi = n * theta, x_lo = n * (theta + theta * theta);
    o.p_absent = pow_absent(theta, n);
    o.p_absent_hi = std::exp(-x_hi);
    o.p_absent_lo = small ? std::exp(-x_lo) : 0.0;
    o.p_present = prob_present(theta, n);
    o.p_present_lo = -std::expm1(-x_hi);
    o.p_present_hi = small ? -std::expm1(-x_lo) : 1.0;
    o.mean_reoccur = mean_reoccurrences(theta, n);
    o.mean_reoccur_hi = exp_excess(x_hi);
    o.mean_reoccur_lo = small ? exp_excess(x_lo) - n * theta * theta : n * theta - 1.0;
    if (theta <= 1.0 / n) {
        o.binomial_refined = true;
        double c2 = n * (n - 1.0) / 2.0 * theta * theta;
        double c3 = n * (n - 1.0) * (n - 2.0) / 6.0 * theta * theta * theta;
        o.p_present_lo = std::max(o.p_present_lo, n * theta - c2);
        o.p_present_hi = std::min(o.p_present_hi, n * theta - c2 + c3);
        o.binom_reoccur_lo = c2 - c3;
        o.binom_reoccur_hi = c2;
    }
    return o;
}

}  // namespace pe
