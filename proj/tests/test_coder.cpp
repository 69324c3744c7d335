#include <cmath>
#include <random>

#include "doctest.h"
#include "pattern_entropy/coder.hpp"
#include "pattern_entropy/error.hpp"
#include "pattern_entropy/oracle.hpp"
#include "pattern_entropy/patterns.hpp"

using namespace pe;

namespace {

struct ThreeLetters {
    ParamVector theta = ParamVector::from_levels({{1.0 / 3.0, 3}});
    CoderModel model = make_coder_model(theta, 100, 0.25);
    std::uint32_t b = static_cast<std::uint32_t>(bin_index(model.grid, 1.0 / 3.0));
};

ParamVector random_theta(std::mt19937_64& rng, std::size_t k) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<double> w(k);
    double s = 0;
    for (auto& x : w) s += (x = u(rng));
    for (auto& x : w) x /= s;
    return ParamVector::from_probs(w);
}

}  // namespace

TEST_CASE("single bin model step probabilities") {
    ThreeLetters m;
    REQUIRE(m.b >= 2);
    CHECK(m.model.rho[m.b] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CoderState st(m.model.grid.num_bins());
    CHECK(next_symbol_prob(m.model, st, 1, m.b) == doctest::Approx(1.0).epsilon(1e-15));
    st.update(1, m.b);
    CHECK(next_symbol_prob(m.model, st, 1, m.b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(next_symbol_prob(m.model, st, 2, m.b) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(next_symbol_prob(m.model, st, 1, m.b - 1) == 0.0);
    CHECK_THROWS_AS(next_symbol_prob(m.model, st, 3, m.b), ValidationError);
}

TEST_CASE("single bin model codelengths") {
    ThreeLetters m;
    CHECK(sequence_codelength(m.model, make_pattern({1, 1}), {m.b, m.b}).bits ==
          doctest::Approx(std::log2(3.0)).epsilon(1e-14));
    CHECK(sequence_codelength(m.model, make_pattern({1, 2}), {m.b, m.b}).bits ==
          doctest::Approx(std::log2(1.5)).epsilon(1e-14));
    auto bad = sequence_codelength(m.model, make_pattern({1, 1}), {m.b, m.b - 1});
    CHECK(std::isinf(bad.bits));
    CHECK(bad.zero_step == std::optional<std::size_t>(1));
}

TEST_CASE("conditional probabilities sum to one along sampled paths") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 100; ++t) {
        std::size_t k = 1 + rng() % 6, n = 2 + rng() % 30;
        auto theta = random_theta(rng, k);
        auto model = make_coder_model(theta, static_cast<double>(n), 0.25);
        auto x = sample_sequence(theta, n, rng());
        auto psi = extract_pattern(x);
        auto beta = bin_sequence(theta, model.grid, x);
        CoderState st(model.grid.num_bins());
        for (std::size_t j = 0; j < n; ++j) {
            double total = 0;
            for (std::uint32_t i = 1; i <= st.max_index(); ++i)
                total += next_symbol_prob(model, st, i, st.bin_of(i));
            for (auto b : model.populated) total += next_symbol_prob(model, st, st.max_index() + 1, b);
            CHECK(total <= 1.0 + 1e-12);
            CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
            st.update(psi.indices[j], beta[j]);
        }
    }
}

TEST_CASE("expected codelength dominates the joint entropy at n=2") {
    std::mt19937_64 rng(37);
    for (int t = 0; t < 20; ++t) {
        auto theta = random_theta(rng, 1 + rng() % 4);
        Grid g = build_grid(GridKind::eta, 2, 0.25);
        auto e = exact_entropies(theta, g, 2);
        CHECK(e.expected_codelength >= e.h_joint - 1e-9);
    }
}

TEST_CASE("encode and decode round trip within two bits of the codelength") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 300; ++t) {
        std::size_t k = 1 + rng() % 8, n = 1 + rng() % 64;
        auto theta = random_theta(rng, k);
        auto model = make_coder_model(theta, std::max<double>(n, 2.0), 0.25);
        auto x = sample_sequence(theta, n, rng());
        auto psi = extract_pattern(x);
        auto beta = bin_sequence(theta, model.grid, x);
        auto bits = encode(model, psi, beta);
        auto [psi2, beta2] = decode(model, bits, n);
        CHECK(psi2 == psi);
        CHECK(beta2 == beta);
        double len = sequence_codelength(model, psi, beta).bits;
        CHECK(static_cast<double>(bits.bit_count) >= len - 1e-9);
        CHECK(static_cast<double>(bits.bit_count) <= len + 2.0);
        CHECK(decode(model, bits, n) == decode(model, bits, n));
    }
}

TEST_CASE("one-letter alphabet codes in at most two bits") {
    auto theta = ParamVector::from_probs({1.0});
    auto model = make_coder_model(theta, 50, 0.25);
    for (std::size_t n : {1, 5, 50}) {
        std::vector<std::uint64_t> x(n, 1);
        auto bits = encode(model, extract_pattern(x), bin_sequence(theta, model.grid, x));
        CHECK(bits.bit_count <= 2);
    }
}

TEST_CASE("non-canonical streams are rejected") {
    auto theta = ParamVector::from_probs({0.2, 0.3, 0.5});
    auto model = make_coder_model(theta, 20, 0.25);
    auto x = sample_sequence(theta, 20, 9);
    auto psi = extract_pattern(x);
    auto beta = bin_sequence(theta, model.grid, x);
    auto bits = encode(model, psi, beta);
    auto longer = bits;
    for (int i = 0; i < 9; ++i) longer.push(true);
    CHECK_THROWS_AS(decode(model, longer, 20), DecodeError);
}

TEST_CASE("unencodable events are rejected") {
    ThreeLetters m;
    CHECK_THROWS(encode(m.model, make_pattern({1, 1}), {m.b, m.b - 1}));
}

TEST_CASE("hex packing round trip") {
    BitString b;
    for (int i = 0; i < 13; ++i) b.push(i % 3 == 0);
    CHECK(b.bit_count == 13);
    CHECK(to_hex(b) == "9248");
    CHECK(from_hex(to_hex(b), 13) == b);
}
