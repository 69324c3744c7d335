#include "pattern_entropy/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "pattern_entropy/error.hpp"
#include "pattern_entropy/numeric.hpp"
#include "pattern_entropy/patterns.hpp"

namespace pe {

namespace {

double entropy_of(const std::unordered_map<std::string, long double>& masses) {
    Sum h;
    for (const auto& [key, p] : masses)
        if (p > 0.0L) h += -p * std::log2(p);
    return static_cast<double>(h.value());
}

void check_cap(std::uint64_t k, std::size_t n, std::uint64_t cap) {
    long double count = std::pow(static_cast<long double>(k), static_cast<long double>(n));
    if (count > static_cast<long double>(cap))
        throw ResourceCapError("k^n exceeds the enumeration cap");
}

}  // namespace

ExactEntropies exact_entropies(const ParamVector& theta, const Grid& grid, std::size_t n,
                               std::uint64_t cap) {
    if (n == 0) throw ValidationError("n must be >= 1");
    const std::uint64_t k = theta.size();
    check_cap(k, n, cap);
    const auto th = theta.expand();
    const CoderModel model = make_coder_model(theta, grid);
    std::vector<std::uint32_t> letter_bin(k);
    for (std::uint64_t i = 0; i < k; ++i)
        letter_bin[i] = static_cast<std::uint32_t>(bin_index(grid, th[i]));

    ExactEntropies out;
    out.h_x_block = static_cast<double>(n) * iid_entropy(theta);
    out.distinct_pmf.assign(grid.num_bins(), {});
    for (std::size_t b = 0; b < grid.num_bins(); ++b)
        out.distinct_pmf[b].assign(std::min<std::uint64_t>(model.stats.count[b], n) + 1, 0.0);
    std::vector<std::vector<Sum>> pmf(grid.num_bins());
    for (std::size_t b = 0; b < grid.num_bins(); ++b) pmf[b].resize(out.distinct_pmf[b].size());

    std::unordered_map<std::string, long double> by_pattern, by_joint;
    Sum expected;

    // Depth-first over x^n with incremental pattern, bins and -log Q.
    std::vector<std::uint32_t> index_of(k, 0);
    std::string pkey(n, '\0'), jkey(2 * n, '\0');
    std::vector<CoderState> states(n + 1, CoderState(grid.num_bins()));
    std::vector<std::uint32_t> distinct_in_bin(grid.num_bins(), 0);
    std::uint32_t m = 0;

    std::function<void(std::size_t, long double, long double)> dfs =
        [&](std::size_t j, long double p, long double code) {
            if (j == n) {
                by_pattern[pkey] += p;
                by_joint[jkey] += p;
                if (std::isinf(code)) {
                    if (p > 0.0L) throw ValidationError("true-source sequence with Q = 0");
                } else {
                    expected += p * code;
                }
                for (std::size_t b = 0; b < distinct_in_bin.size(); ++b)
                    if (model.stats.count[b]) pmf[b][distinct_in_bin[b]] += p;
                ++out.sequences;
                return;
            }
            for (std::uint64_t i = 0; i < k; ++i) {
                bool fresh = index_of[i] == 0;
                if (fresh) {
                    index_of[i] = ++m;
                    ++distinct_in_bin[letter_bin[i]];
                }
                std::uint32_t psi = index_of[i], beta = letter_bin[i];
                double q = next_symbol_prob(model, states[j], psi, beta);
                states[j + 1] = states[j];
                states[j + 1].update(psi, beta);
                pkey[j] = static_cast<char>(psi);
                jkey[2 * j] = static_cast<char>(psi);
                jkey[2 * j + 1] = static_cast<char>(beta);
                long double step = q > 0.0 ? -std::log2(static_cast<long double>(q))
                                           : std::numeric_limits<long double>::infinity();
                dfs(j + 1, p * th[i], code + step);
                if (fresh) {
                    index_of[i] = 0;
                    --m;
                    --distinct_in_bin[letter_bin[i]];
                }
            }
        };
    if (grid.num_bins() > 255) {
        // Keys store bins in one byte; larger grids only matter for bin ids, so remap.
        throw ValidationError("exact enumeration supports grids with at most 255 bins");
    }
    dfs(0, 1.0L, 0.0L);

    out.h_pattern_grouped = entropy_of(by_pattern);
    out.h_joint = entropy_of(by_joint);
    out.expected_codelength = static_cast<double>(expected.value());
    for (std::size_t b = 0; b < pmf.size(); ++b)
        for (std::size_t c = 0; c < pmf[b].size(); ++c)
            out.distinct_pmf[b][c] = static_cast<double>(pmf[b][c].value());
    for (std::size_t b = 0; b < pmf.size(); ++b)
        if (!model.stats.count[b]) out.distinct_pmf[b][0] = 1.0;

    Sum hp;
    for_each_pattern(n, static_cast<std::size_t>(std::min<std::uint64_t>(k, n)), [&](const Pattern& psi) {
        double p = pattern_probability(th, psi);
        if (p > 0.0) hp += -static_cast<long double>(p) * std::log2(static_cast<long double>(p));
    }, cap);
    out.h_pattern = static_cast<double>(hp.value());
    return out;
}

namespace {

// Probability that the first indices carry the given multiplicities and each
// index j maps to a distinct letter inside bin index_bin[j].
long double restricted_injection_sum(const std::vector<double>& th,
                                     const std::vector<std::uint32_t>& letter_bin,
                                     const std::vector<std::uint32_t>& mult,
                                     const std::vector<std::uint32_t>& index_bin) {
    const std::size_t k = th.size(), m = mult.size();
    std::vector<long double> f(std::size_t{1} << k, 0.0L);
    f[0] = 1.0L;
    long double total = 0.0L;
    for (std::size_t mask = 0; mask < f.size(); ++mask) {
        if (f[mask] == 0.0L) continue;
        auto j = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (j == m) {
            total += f[mask];
            continue;
        }
        for (std::size_t i = 0; i < k; ++i)
            if (!(mask >> i & 1) && letter_bin[i] == index_bin[j])
                f[mask | (std::size_t{1} << i)] +=
                    f[mask] * std::pow(static_cast<long double>(th[i]), mult[j]);
    }
    return total;
}

}  // namespace

PrefixExpectation expected_codelength_by_prefix(const ParamVector& theta, const Grid& grid,
                                                std::size_t n, std::uint64_t cap) {
    const auto th = theta.expand(20);
    const std::uint64_t k = th.size();
    const CoderModel model = make_coder_model(theta, grid);
    std::vector<std::uint32_t> letter_bin(k);
    for (std::uint64_t i = 0; i < k; ++i)
        letter_bin[i] = static_cast<std::uint32_t>(bin_index(grid, th[i]));

    PrefixExpectation out;
    Sum expected, joint;
    std::vector<std::uint32_t> mult, index_bin;

    std::function<void(std::size_t, const CoderState&)> walk = [&](std::size_t j, const CoderState& st) {
        if (j == n) return;
        // Children: repeat a seen index, or open a new index in a populated bin.
        std::vector<std::pair<std::uint32_t, std::uint32_t>> kids;
        for (std::uint32_t i = 1; i <= st.max_index(); ++i) kids.push_back({i, st.bin_of(i)});
        if (st.max_index() < k)
            for (auto b : model.populated) kids.push_back({st.max_index() + 1, b});
        for (auto [psi, beta] : kids) {
            if (++out.nodes > cap) throw ResourceCapError("prefix walk cap exceeded");
            bool fresh = psi > st.max_index();
            if (fresh) {
                mult.push_back(1);
                index_bin.push_back(beta);
            } else {
                ++mult[psi - 1];
            }
            long double p = restricted_injection_sum(th, letter_bin, mult, index_bin);
            if (p > 0.0L) {
                double q = next_symbol_prob(model, st, psi, beta);
                if (!(q > 0.0)) throw ValidationError("reachable prefix with Q = 0");
                expected += -p * std::log2(static_cast<long double>(q));
                if (j + 1 == n) joint += -p * std::log2(p);
                CoderState next = st;
                next.update(psi, beta);
                walk(j + 1, next);
            }
            if (fresh) {
                mult.pop_back();
                index_bin.pop_back();
            } else {
                --mult[psi - 1];
            }
        }
    };
    walk(0, CoderState(grid.num_bins()));
    out.expected_codelength = static_cast<double>(expected.value());
    out.h_joint = static_cast<double>(joint.value());
    return out;
}

CodelengthDecomposition codelength_decomposition(const CoderModel& model, const ParamVector& theta,
                                                 const std::vector<std::vector<double>>& distinct_pmf) {
    (void)theta;
    const double n = model.grid.n;
    const auto& s = model.stats;
    CodelengthDecomposition d;
    Sum large, gain;
    for (std::size_t b = 2; b < s.count.size(); ++b) {
        if (!s.count[b]) continue;
        large += -n * s.phi[b] * std::log2(model.rho[b]);
        for (std::size_t m = 0; m < distinct_pmf[b].size(); ++m)
            gain += distinct_pmf[b][m] * log2_falling(static_cast<double>(s.count[b]), static_cast<double>(m));
    }
    d.large_letter_cost = static_cast<double>(large.value());
    d.first_occurrence_gain = static_cast<double>(gain.value());
    for (std::size_t b = 0; b < 2 && b < s.count.size(); ++b) {
        if (!s.count[b]) continue;
        Sum r;
        double reoccur = n * s.phi[b] - s.L[b];
        if (reoccur > 0.0) r += reoccur * std::log2(model.rho[b]);
        for (std::size_t m = 1; m < distinct_pmf[b].size(); ++m) {
            if (distinct_pmf[b][m] == 0.0) continue;
            Sum inner;
            for (std::size_t l = 0; l < m; ++l)
                inner += std::log2(s.phi[b] - static_cast<double>(l) * model.rho[b]);
            r += distinct_pmf[b][m] * inner.value();
        }
        (b == 0 ? d.r0 : d.r1) = static_cast<double>(r.value());
    }
    return d;
}

McEstimate mc_pattern_entropy(const ParamVector& theta, std::size_t n, std::size_t samples,
                              std::uint64_t seed) {
    if (theta.size() > 16) throw ResourceCapError("Monte Carlo needs k <= 16 for exact pattern probabilities");
    if (samples < 2) throw ValidationError("Monte Carlo needs at least 2 samples");
    const auto th = theta.expand();
    std::mt19937_64 rng(seed);
    std::discrete_distribution<std::size_t> pick(th.begin(), th.end());
    std::unordered_map<std::string, double> cache;
    Sum s1, s2;
    std::vector<std::uint64_t> x(n);
    for (std::size_t t = 0; t < samples; ++t) {
        for (auto& v : x) v = pick(rng);
        Pattern psi = extract_pattern(x);
        std::string key(psi.indices.begin(), psi.indices.end());
        auto it = cache.find(key);
        if (it == cache.end()) it = cache.emplace(key, -std::log2(pattern_probability(th, psi))).first;
        double v = it->second;
        s1 += v;
        s2 += static_cast<long double>(v) * v;
    }
    McEstimate e;
    e.samples = samples;
    const long double N = static_cast<long double>(samples);
    long double mean = s1.value() / N;
    long double var = (s2.value() - N * mean * mean) / (N - 1.0L);
    e.estimate = static_cast<double>(mean);
    e.standard_error = var > 0.0L ? static_cast<double>(std::sqrt(var / N)) : 0.0;
    if (theta.size() == 1) e.estimate = 0.0;
    return e;
}

std::uint64_t brute_force_permutation_count(const std::vector<std::uint32_t>& bin_of_letter) {
    if (bin_of_letter.size() > 10) throw ResourceCapError("brute-force permutation count needs k <= 10");
    std::vector<std::uint32_t> sigma(bin_of_letter.size());
    std::iota(sigma.begin(), sigma.end(), 0u);
    std::uint64_t count = 0;
    do {
        bool ok = true;
        for (std::size_t i = 0; i < sigma.size() && ok; ++i)
            ok = bin_of_letter[sigma[i]] == bin_of_letter[i];
        count += ok;
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return count;
}

std::uint64_t product_of_factorials(const std::vector<std::uint32_t>& bin_of_letter) {
    std::map<std::uint32_t, std::uint64_t> counts;
    for (auto b : bin_of_letter) ++counts[b];
    std::uint64_t prod = 1;
    for (auto [b, c] : counts)
        for (std::uint64_t j = 2; j <= c; ++j) prod *= j;
    return prod;
}

}  // namespace pe
