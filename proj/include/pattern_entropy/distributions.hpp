#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pe {

// A group of letters sharing one probability.
struct Level {
    double p = 0.0;
    std::uint64_t count = 0;
};

// Source model theta, sorted ascending. Stored run-length encoded so that
// families with 1e8+ letters of equal mass stay cheap.
class ParamVector {
public:
    ParamVector() = default;

    static ParamVector from_probs(std::vector<double> probs);
    static ParamVector from_levels(std::vector<Level> levels);

    std::uint64_t size() const { return k_; }
    const std::vector<Level>& levels() const { return levels_; }

    // Letter i (0-based, ascending order).
    double operator[](std::uint64_t i) const;
    // Index of the level holding letter i.
    std::size_t level_of(std::uint64_t i) const;

    std::vector<double> expand(std::uint64_t cap = 10'000'000) const;
    double total_mass() const;

private:
    void validate() const;

    std::vector<Level> levels_;
    std::vector<std::uint64_t> first_;  // first letter index of each level
    std::uint64_t k_ = 0;
};

enum class Family { explicit_probs, uniform, two_level, geometric, zipf };

Family family_from_string(const std::string& s);
std::string to_string(Family f);

struct SourceSpec {
    Family family = Family::uniform;
    std::vector<double> probs;      // explicit
    std::optional<double> k;        // uniform, geometric, zipf
    double n = 0.0;                 // horizon for n-relative families
    double nu = 0.0;                // uniform: k = n^{1-nu}; two_level: second level exponent
    double mu = 1.0;                // two_level: first level p = 1/n^{1+mu}
    double phi0 = 0.5;              // two_level: mass of the first level
    double decay = 0.5;             // geometric ratio
    double exponent = 1.0;          // zipf
};

struct Distribution {
    ParamVector theta;
    double renormalization = 1.0;   // factor applied to the adjusted level
};

Distribution make_distribution(const SourceSpec& spec);

// Staircase source: d letters at each xi_b, b = 1..beta. The horizon n is
// solved so that the masses sum to one.
struct Staircase {
    ParamVector theta;
    double n = 0.0;
};
Staircase make_staircase(std::uint64_t d, std::uint64_t beta, double epsilon);

double iid_entropy(const ParamVector& theta);
double binary_entropy(double alpha);

// Symbols are 1-based letter indices into the ascending theta.
std::vector<std::uint64_t> sample_sequence(const ParamVector& theta, std::size_t n,
                                           std::uint64_t seed);

}  // namespace pe
