#include "pattern_entropy/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pattern_entropy/error.hpp"
#include "pattern_entropy/numeric.hpp"

namespace pe {

ParamVector ParamVector::from_probs(std::vector<double> probs) {
    std::sort(probs.begin(), probs.end());
    std::vector<Level> levels;
    for (double p : probs) {
        if (!levels.empty() && levels.back().p == p)
            ++levels.back().count;
        else
            levels.push_back({p, 1});
    }
    return from_levels(std::move(levels));
}

ParamVector ParamVector::from_levels(std::vector<Level> levels) {
    std::erase_if(levels, [](const Level& l) { return l.count == 0; });
    std::sort(levels.begin(), levels.end(),
              [](const Level& a, const Level& b) { return a.p < b.p; });
    ParamVector v;
    for (const auto& l : levels) {
        if (!v.levels_.empty() && v.levels_.back().p == l.p) {
            v.levels_.back().count += l.count;
            continue;
        }
        v.levels_.push_back(l);
    }
    for (const auto& l : v.levels_) {
        v.first_.push_back(v.k_);
        v.k_ += l.count;
    }
    v.validate();
    return v;
}

void ParamVector::validate() const {
    if (k_ == 0) throw ValidationError("empty probability vector");
    for (const auto& l : levels_) {
        if (!(l.p > 0.0) || !std::isfinite(l.p))
            throw ValidationError("probabilities must be strictly positive");
        if (l.p > 1.0) throw ValidationError("probability above 1");
    }
    double s = total_mass();
    double tol = 1e-12 + 4e-16 * static_cast<double>(levels_.size());
    if (std::fabs(s - 1.0) > tol)
        throw ValidationError("probabilities sum to " + std::to_string(s) + ", not 1");
}

double ParamVector::total_mass() const {
    Sum s;
    for (const auto& l : levels_) s += static_cast<long double>(l.p) * l.count;
    return static_cast<double>(s.value());
}

std::size_t ParamVector::level_of(std::uint64_t i) const {
    if (i >= k_) throw ValidationError("letter index out of range");
    auto it = std::upper_bound(first_.begin(), first_.end(), i);
    return static_cast<std::size_t>(it - first_.begin()) - 1;
}

double ParamVector::operator[](std::uint64_t i) const { return levels_[level_of(i)].p; }

std::vector<double> ParamVector::expand(std::uint64_t cap) const {
    if (k_ > cap) throw ResourceCapError("alphabet too large to expand");
    std::vector<double> out;
    out.reserve(k_);
    for (const auto& l : levels_) out.insert(out.end(), l.count, l.p);
    return out;
}

Family family_from_string(const std::string& s) {
    if (s == "explicit") return Family::explicit_probs;
    if (s == "uniform") return Family::uniform;
    if (s == "two_level" || s == "two-level") return Family::two_level;
    if (s == "geometric") return Family::geometric;
    if (s == "zipf") return Family::zipf;
    throw ValidationError("unknown family: " + s);
}

std::string to_string(Family f) {
    switch (f) {
        case Family::explicit_probs: return "explicit";
        case Family::uniform: return "uniform";
        case Family::two_level: return "two_level";
        case Family::geometric: return "geometric";
        case Family::zipf: return "zipf";
    }
    return "?";
}

namespace {

std::uint64_t alphabet_size(const SourceSpec& spec) {
    if (!spec.k) throw ValidationError(to_string(spec.family) + " family needs k");
    double k = std::round(*spec.k);
    if (k < 1.0) throw ValidationError("alphabet size rounds to zero");
    return static_cast<std::uint64_t>(k);
}

Distribution normalized(std::vector<double> w) {
    Sum s;
    for (double x : w) s += x;
    double total = static_cast<double>(s.value());
    for (double& x : w) x /= total;
    return {ParamVector::from_probs(std::move(w)), 1.0};
}

}  // namespace

Distribution make_distribution(const SourceSpec& spec) {
    switch (spec.family) {
        case Family::explicit_probs:
            return {ParamVector::from_probs(spec.probs), 1.0};

        case Family::uniform: {
            std::uint64_t k;
            if (spec.k) {
                k = alphabet_size(spec);
            } else {
                if (spec.n < 1.0) throw ValidationError("uniform family needs k or n");
                double kr = std::round(std::pow(spec.n, 1.0 - spec.nu));
                if (kr < 1.0) throw ValidationError("alphabet size rounds to zero");
                k = static_cast<std::uint64_t>(kr);
            }
            return {ParamVector::from_levels({{1.0 / static_cast<double>(k), k}}), 1.0};
        }

        case Family::two_level: {
            if (spec.n < 2.0) throw ValidationError("two_level family needs n >= 2");
            if (!(spec.phi0 > 0.0 && spec.phi0 < 1.0))
                throw ValidationError("phi0 must lie in (0,1)");
            double p0 = std::pow(spec.n, -(1.0 + spec.mu));
            double k0 = std::round(spec.phi0 / p0);
            double p1_nominal = std::pow(spec.n, -(1.0 - spec.nu));
            double k1 = std::round((1.0 - spec.phi0) / p1_nominal);
            if (k0 < 1.0 || k1 < 1.0) throw ValidationError("level count rounds to zero");
            double nominal = k0 * p0 + k1 * p1_nominal;
            if (std::fabs(nominal - 1.0) > 0.1)
                throw ValidationError("two_level masses sum to " + std::to_string(nominal));
            double rest = 1.0 - k0 * p0;
            if (!(rest > 0.0)) throw ValidationError("first level exhausts the mass");
            double p1 = rest / k1;
            auto theta = ParamVector::from_levels(
                {{p0, static_cast<std::uint64_t>(k0)}, {p1, static_cast<std::uint64_t>(k1)}});
            return {std::move(theta), p1 / p1_nominal};
        }

        case Family::geometric: {
            auto k = alphabet_size(spec);
            if (!(spec.decay > 0.0 && spec.decay <= 1.0))
                throw ValidationError("geometric decay must lie in (0,1]");
            std::vector<double> w(k);
            for (std::uint64_t i = 0; i < k; ++i) w[i] = std::pow(spec.decay, static_cast<double>(i));
            return normalized(std::move(w));
        }

        case Family::zipf: {
            auto k = alphabet_size(spec);
            if (!(spec.exponent >= 0.0)) throw ValidationError("zipf exponent must be >= 0");
            std::vector<double> w(k);
            for (std::uint64_t i = 0; i < k; ++i)
                w[i] = std::pow(static_cast<double>(i + 1), -spec.exponent);
            return normalized(std::move(w));
        }
    }
    throw ValidationError("unknown family");
}

Staircase make_staircase(std::uint64_t d, std::uint64_t beta, double epsilon) {
    if (d == 0 || beta == 0) throw ValidationError("staircase needs d, beta >= 1");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must lie in [0,1)");
    double b = static_cast<double>(beta);
    double scale = static_cast<double>(d) * b * (b + 1.0) * (2.0 * b + 1.0) / 6.0;
    std::vector<Level> levels;
    for (std::uint64_t j = 1; j <= beta; ++j) {
        double jj = static_cast<double>(j);
        levels.push_back({jj * jj / scale, d});
    }
    return {ParamVector::from_levels(std::move(levels)), std::pow(scale, 1.0 / (1.0 - epsilon))};
}

double iid_entropy(const ParamVector& theta) {
    Sum s;
    for (const auto& l : theta.levels())
        s += static_cast<long double>(plogp(l.p)) * l.count;
    return static_cast<double>(s.value());
}

double binary_entropy(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ValidationError("binary entropy argument outside [0,1]");
    return plogp(alpha) + plogp(1.0 - alpha);
}

std::vector<std::uint64_t> sample_sequence(const ParamVector& theta, std::size_t n,
                                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto& levels = theta.levels();
    std::vector<double> w;
    std::vector<std::uint64_t> first;
    std::uint64_t acc = 0;
    for (const auto& l : levels) {
        w.push_back(l.p * static_cast<double>(l.count));
        first.push_back(acc);
        acc += l.count;
    }
    std::discrete_distribution<std::size_t> pick(w.begin(), w.end());
    std::vector<std::uint64_t> x(n);
    for (auto& s : x) {
        std::size_t lv = levels.size() == 1 ? 0 : pick(rng);
        std::uint64_t off = 0;
        if (levels[lv].count > 1)
            off = std::uniform_int_distribution<std::uint64_t>(0, levels[lv].count - 1)(rng);
        s = first[lv] + off + 1;
    }
    return x;
}

}  // namespace pe
