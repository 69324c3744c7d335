#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pattern_entropy/distributions.hpp"

namespace pe {

enum class GridKind { tau, eta, xi };

GridKind grid_kind_from_string(const std::string& s);
std::string to_string(GridKind k);

// Partition of (0,1]. Bin b is (points[b], points[b+1]].
struct Grid {
    GridKind kind = GridKind::tau;
    double n = 0.0;
    double epsilon = 0.0;
    std::vector<double> points;   // points[0] = 0, back() = 1
    std::size_t B = 0;            // last regular index
    std::size_t A = 0;            // last index with point <= 1/2
    // eta only: shift D = floor(n^{3 eps/2}); d = floor(n^{eps/2}) - 1 is the
    // shift quoted next to the spacing law, kept for dumps.
    std::uint64_t shift_D = 0;
    std::int64_t spacing_d = 0;
    bool terminal_coincides = false;  // regular point B already equals 1
    std::vector<std::string> flags;

    std::size_t num_bins() const { return points.size() - 1; }
    // Exponent of the b^2 denominator: 1+eps (tau), 1+2eps (eta), 1-eps (xi).
    double scale() const;
};

Grid build_grid(GridKind kind, double n, double epsilon);

// Closed forms for the last regular index and the last index at or below 1/2.
std::size_t closed_form_B(GridKind kind, double n, double epsilon);
std::size_t closed_form_A(GridKind kind, double n, double epsilon);

// Bin b with theta in (points[b], points[b+1]].
std::size_t bin_index(const Grid& grid, double theta);

struct BinStats {
    std::vector<std::uint64_t> count;        // c_b, k_b or kappa_b
    std::vector<std::uint64_t> kappa_prime;  // xi grids only
    std::vector<double> phi;
    std::vector<double> ell;                 // min(count, n)
    std::vector<double> L;                   // expected distinct letters
    std::vector<double> L_lo, L_hi;          // bracket from the occurrence bounds
    std::vector<double> sum_sq, sum_cube;    // per-bin sums of theta^2, theta^3
    std::vector<std::size_t> level_bin;      // bin of each theta level
    double L_total = 0.0;
    // merged bins 0 and 1 (meaningful on eta grids)
    std::uint64_t k01 = 0;
    double phi01 = 0.0, ell01 = 0.0, L01 = 0.0;
};

BinStats bin_stats(const Grid& grid, const ParamVector& theta);

struct OccurrenceStats {
    double p_absent = 0.0;
    double p_absent_lo = 0.0, p_absent_hi = 0.0;
    double p_present = 0.0;
    double p_present_lo = 0.0, p_present_hi = 0.0;
    double mean_reoccur = 0.0;
    double mean_reoccur_lo = 0.0, mean_reoccur_hi = 0.0;
    bool binomial_refined = false;  // theta <= 1/n
    double binom_reoccur_lo = 0.0, binom_reoccur_hi = 0.0;
};

OccurrenceStats occurrence_stats(double theta, double n);

// n theta - 1 + (1 - theta)^n without cancellation.
double mean_reoccurrences(double theta, double n);

}  // namespace pe
