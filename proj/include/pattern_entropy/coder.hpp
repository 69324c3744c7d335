#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pattern_entropy/distributions.hpp"
#include "pattern_entropy/grids.hpp"
#include "pattern_entropy/patterns.hpp"

namespace pe {

struct CoderModel {
    Grid grid;
    BinStats stats;
    std::vector<double> rho;
    std::vector<std::uint32_t> populated;  // bins with at least one letter, ascending
    std::vector<std::string> flags;
};

CoderModel make_coder_model(const ParamVector& theta, const Grid& grid);
CoderModel make_coder_model(const ParamVector& theta, double n, double epsilon);

class CoderState {
public:
    explicit CoderState(std::size_t num_bins) : seen_per_bin_(num_bins, 0) {}

    std::uint32_t max_index() const { return max_index_; }
    std::uint32_t seen(std::uint32_t bin) const { return seen_per_bin_[bin]; }
    // 0 for an index not seen yet.
    std::uint32_t bin_of(std::uint32_t index) const {
        return index <= max_index_ ? index_to_bin_[index - 1] : 0;
    }
    void update(std::uint32_t psi, std::uint32_t beta);

private:
    std::vector<std::uint32_t> seen_per_bin_;
    std::vector<std::uint32_t> index_to_bin_;
    std::uint32_t max_index_ = 0;
};

// Q(psi_j, beta_j | past). Negative new-occurrence mass is clamped to zero and
// reported through clamped.
double next_symbol_prob(const CoderModel& model, const CoderState& state, std::uint32_t psi,
                        std::uint32_t beta, bool* clamped = nullptr);

struct Codelength {
    double bits = 0.0;                     // -log2 Q, +inf if some step has Q = 0
    std::optional<std::size_t> zero_step;  // first position with Q = 0
    bool clamped = false;
};

Codelength sequence_codelength(const CoderModel& model, const Pattern& psi, const BinSeq& beta);

// Big-endian bit packing, no header.
struct BitString {
    std::vector<std::uint8_t> bytes;
    std::size_t bit_count = 0;

    bool bit(std::size_t i) const { return bytes[i / 8] >> (7 - i % 8) & 1; }
    void push(bool b);
    bool operator==(const BitString&) const = default;
};

std::string to_hex(const BitString& bits);
BitString from_hex(const std::string& hex, std::size_t bit_count);

BitString encode(const CoderModel& model, const Pattern& psi, const BinSeq& beta);
std::pair<Pattern, BinSeq> decode(const CoderModel& model, const BitString& bits, std::size_t n);

}  // namespace pe
