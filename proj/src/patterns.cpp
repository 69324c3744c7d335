#include "pattern_entropy/patterns.hpp"

#include <cmath>
#include <sstream>

#include "pattern_entropy/numeric.hpp"

namespace pe {

bool is_restricted_growth(const std::vector<std::uint32_t>& s) {
    std::uint32_t mx = 0;
    for (auto v : s) {
        if (v == 0 || v > mx + 1) return false;
        mx = std::max(mx, v);
    }
    return !s.empty();
}

Pattern make_pattern(std::vector<std::uint32_t> indices) {
    if (!is_restricted_growth(indices)) throw ValidationError("not a restricted growth string");
    Pattern p;
    for (auto v : indices) p.m = std::max(p.m, v);
    p.indices = std::move(indices);
    return p;
}

std::string to_string(const Pattern& p) {
    std::ostringstream os;
    for (std::size_t j = 0; j < p.indices.size(); ++j) {
        if (p.m > 9 && j) os << ',';
        os << p.indices[j];
    }
    return os.str();
}

Pattern parse_pattern(const std::string& s) {
    std::vector<std::uint32_t> v;
    if (s.find(',') != std::string::npos) {
        std::istringstream is(s);
        std::string tok;
        while (std::getline(is, tok, ',')) v.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    } else {
        for (char c : s) {
            if (c < '0' || c > '9') throw ValidationError("bad pattern string: " + s);
            v.push_back(static_cast<std::uint32_t>(c - '0'));
        }
    }
    return make_pattern(std::move(v));
}

void for_each_pattern(std::size_t n, std::size_t k, const std::function<void(const Pattern&)>& fn,
                      std::uint64_t cap) {
    if (n == 0 || k == 0) throw ValidationError("enumeration needs n, k >= 1");
    Pattern p;
    p.indices.assign(n, 1);
    std::vector<std::uint32_t> run_max(n, 1);  // max over indices[0..j]
    std::uint64_t produced = 0;
    // Odometer over restricted growth strings in lexicographic order.
    for (;;) {
        p.m = run_max[n - 1];
        if (++produced > cap) throw ResourceCapError("pattern enumeration cap exceeded");
        fn(p);
        std::size_t j = n - 1;
        for (;; --j) {
            if (j == 0) return;
            std::uint32_t limit = std::min<std::uint32_t>(run_max[j - 1] + 1, static_cast<std::uint32_t>(k));
            if (p.indices[j] < limit) break;
        }
        ++p.indices[j];
        run_max[j] = std::max(run_max[j - 1], p.indices[j]);
        for (std::size_t t = j + 1; t < n; ++t) {
            p.indices[t] = 1;
            run_max[t] = run_max[t - 1];
        }
    }
}

std::vector<Pattern> enumerate_patterns(std::size_t n, std::size_t k, std::uint64_t cap) {
    std::vector<Pattern> out;
    for_each_pattern(n, k, [&](const Pattern& p) { out.push_back(p); }, cap);
    return out;
}

double pattern_probability(const std::vector<double>& theta, const Pattern& psi) {
    const std::size_t k = theta.size();
    if (psi.m > k) return 0.0;
    if (k > 24) throw ResourceCapError("pattern probability needs k <= 24");
    std::vector<std::uint32_t> mult(psi.m, 0);
    for (auto v : psi.indices) ++mult[v - 1];
    // pw[j][i] = theta_i^{n_j}
    std::vector<std::vector<long double>> pw(psi.m, std::vector<long double>(k));
    for (std::size_t j = 0; j < psi.m; ++j)
        for (std::size_t i = 0; i < k; ++i)
            pw[j][i] = std::pow(static_cast<long double>(theta[i]), mult[j]);
    // f[mask] = total weight of assigning the first popcount(mask) indices to mask.
    std::vector<long double> f(std::size_t{1} << k, 0.0L);
    f[0] = 1.0L;
    long double total = 0.0L;
    for (std::size_t mask = 0; mask < f.size(); ++mask) {
        if (f[mask] == 0.0L) continue;
        auto j = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (j == psi.m) {
            total += f[mask];
            continue;
        }
        for (std::size_t i = 0; i < k; ++i)
            if (!(mask >> i & 1)) f[mask | (std::size_t{1} << i)] += f[mask] * pw[j][i];
    }
    return static_cast<double>(total);
}

double pattern_probability(const ParamVector& theta, const Pattern& psi) {
    if (psi.m > theta.size()) return 0.0;
    return pattern_probability(theta.expand(24), psi);
}

BinSeq bin_sequence(const ParamVector& theta, const Grid& grid,
                    const std::vector<std::uint64_t>& x) {
    BinSeq out;
    out.reserve(x.size());
    for (auto s : x) {
        if (s == 0 || s > theta.size()) throw ValidationError("symbol outside the alphabet");
        out.push_back(static_cast<std::uint32_t>(bin_index(grid, theta[s - 1])));
    }
    return out;
}

}  // namespace pe
