#include "pattern_entropy/coder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pattern_entropy/error.hpp"
#include "pattern_entropy/numeric.hpp"

namespace pe {

CoderModel make_coder_model(const ParamVector& theta, const Grid& grid) {
    CoderModel m;
    m.grid = grid;
    m.stats = bin_stats(grid, theta);
    const std::size_t nb = grid.num_bins();
    const double n = grid.n;
    m.rho.assign(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const double k = static_cast<double>(m.stats.count[b]);
        if (k == 0) continue;
        m.populated.push_back(static_cast<std::uint32_t>(b));
        const double phi = m.stats.phi[b];
        if (b >= 2) {
            m.rho[b] = phi / k;
            continue;
        }
        // Bins 0 and 1 reserve mass for first occurrences.
        double reoccur = 0.0;
        for (std::size_t l = 0; l < theta.levels().size(); ++l)
            if (m.stats.level_bin[l] == b)
                reoccur += static_cast<double>(theta.levels()[l].count) *
                           mean_reoccurrences(theta.levels()[l].p, n);
        m.rho[b] = reoccur / (n * m.stats.ell[b]);
        if (!(phi - (m.stats.ell[b] - 1.0) * m.rho[b] > 0.0))
            m.flags.push_back("bin" + std::to_string(b) + "_first_occurrence_mass_nonpositive");
    }
    return m;
}

CoderModel make_coder_model(const ParamVector& theta, double n, double epsilon) {
    return make_coder_model(theta, build_grid(GridKind::eta, n, epsilon));
}

void CoderState::update(std::uint32_t psi, std::uint32_t beta) {
    if (psi == max_index_ + 1) {
        ++max_index_;
        index_to_bin_.push_back(beta);
        ++seen_per_bin_[beta];
    } else if (psi == 0 || psi > max_index_ + 1) {
        throw ValidationError("pattern step breaks restricted growth");
    }
}

double next_symbol_prob(const CoderModel& model, const CoderState& state, std::uint32_t psi,
                        std::uint32_t beta, bool* clamped) {
    if (psi == 0 || psi > state.max_index() + 1)
        throw ValidationError("pattern step breaks restricted growth");
    if (beta >= model.rho.size()) throw ValidationError("bin index outside the grid");
    if (clamped) *clamped = false;
    if (psi <= state.max_index()) return state.bin_of(psi) == beta ? model.rho[beta] : 0.0;
    double q = model.stats.phi[beta] - state.seen(beta) * model.rho[beta];
    if (q < 0.0) {
        if (clamped) *clamped = q < -1e-15;
        q = 0.0;
    }
    return q;
}

Codelength sequence_codelength(const CoderModel& model, const Pattern& psi, const BinSeq& beta) {
    if (psi.size() != beta.size()) throw ValidationError("pattern and bin sequence lengths differ");
    Codelength out;
    CoderState st(model.rho.size());
    Sum bits;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        bool c = false;
        double q = next_symbol_prob(model, st, psi.indices[j], beta[j], &c);
        out.clamped |= c;
        if (q <= 0.0) {
            if (!out.zero_step) out.zero_step = j;
            out.bits = std::numeric_limits<double>::infinity();
            return out;
        }
        bits += -std::log2(static_cast<long double>(q));
        st.update(psi.indices[j], beta[j]);
    }
    out.bits = static_cast<double>(bits.value());
    return out;
}

void BitString::push(bool b) {
    if (bit_count % 8 == 0) bytes.push_back(0);
    if (b) bytes.back() |= static_cast<std::uint8_t>(0x80 >> (bit_count % 8));
    ++bit_count;
}

std::string to_hex(const BitString& bits) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (auto byte : bits.bytes) {
        s += digits[byte >> 4];
        s += digits[byte & 15];
    }
    return s;
}

BitString from_hex(const std::string& hex, std::size_t bit_count) {
    if (hex.size() % 2) throw ValidationError("hex string has odd length");
    BitString b;
    for (std::size_t i = 0; i < hex.size(); i += 2)
        b.bytes.push_back(static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
    if (bit_count > 8 * b.bytes.size()) throw ValidationError("bit count exceeds payload");
    b.bit_count = bit_count;
    b.bytes.resize((bit_count + 7) / 8);
    return b;
}

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

constexpr int kPrecision = 63;
constexpr u64 kTop = u64{1} << kPrecision;       // window is [0, 2^63)
constexpr u64 kHalfTop = u64{1} << (kPrecision - 1);
constexpr u64 kTotal = u64{1} << 40;             // frequency total

struct Event {
    std::uint32_t psi;
    std::uint32_t beta;
};

// Legal events at a state and their integer frequencies summing to kTotal.
struct Table {
    std::vector<Event> events;
    std::vector<u64> cum;  // size events+1
};

Table make_table(const CoderModel& model, const CoderState& st) {
    Table t;
    std::vector<double> q;
    for (std::uint32_t i = 1; i <= st.max_index(); ++i) {
        std::uint32_t b = st.bin_of(i);
        t.events.push_back({i, b});
        q.push_back(model.rho[b]);
    }
    for (auto b : model.populated) {
        t.events.push_back({st.max_index() + 1, b});
        q.push_back(std::max(0.0, model.stats.phi[b] - st.seen(b) * model.rho[b]));
    }
    double total = 0.0;
    for (double v : q) total += v;
    if (!(total > 0.0)) throw ValidationError("model assigns no mass at this state");
    std::vector<u64> f(q.size(), 0);
    u64 sum = 0;
    std::size_t largest = 0;
    for (std::size_t e = 0; e < q.size(); ++e) {
        if (q[e] > 0.0) f[e] = std::max<u64>(1, static_cast<u64>(q[e] / total * static_cast<double>(kTotal)));
        sum += f[e];
        if (f[e] > f[largest]) largest = e;
    }
    if (sum > kTotal + f[largest] - 1) throw ResourceCapError("too many events for the coder");
    f[largest] = f[largest] + kTotal - sum;
    t.cum.assign(q.size() + 1, 0);
    for (std::size_t e = 0; e < q.size(); ++e) t.cum[e + 1] = t.cum[e] + f[e];
    return t;
}

u64 scaled(u64 range, u64 c) { return static_cast<u64>((static_cast<u128>(range) * c) >> 40); }

class Encoder {
public:
    void code(u64 c0, u64 c1) {
        u64 lo = scaled(range_, c0), hi = scaled(range_, c1);
        low_ += lo;
        range_ = hi - lo;
        if (low_ >= kTop) {
            carry();
            low_ -= kTop;
        }
        while (range_ <= kHalfTop) {
            out_.push(low_ >> (kPrecision - 1) & 1);
            low_ = (low_ << 1) & (kTop - 1);
            range_ <<= 1;
        }
    }

    BitString finish(double min_bits) {
        int r = 63 - __builtin_clzll(range_);
        u64 grain = u64{1} << r;
        u64 v = (low_ + grain - 1) / grain * grain;  // low_ < 2^63, no overflow
        if (v >= kTop) {
            carry();
            v -= kTop;
        }
        for (int b = kPrecision - 1; b >= r; --b) out_.push(v >> b & 1);
        while (static_cast<double>(out_.bit_count) < min_bits) out_.push(false);
        return out_;
    }

private:
    void carry() {
        std::size_t i = out_.bit_count;
        while (i > 0) {
            --i;
            std::uint8_t mask = static_cast<std::uint8_t>(0x80 >> (i % 8));
            if (out_.bytes[i / 8] & mask) {
                out_.bytes[i / 8] &= static_cast<std::uint8_t>(~mask);
            } else {
                out_.bytes[i / 8] |= mask;
                return;
            }
        }
        throw DecodeError("carry out of the code interval");
    }

    BitString out_;
    u64 low_ = 0;
    u64 range_ = kTop;
};

}  // namespace

BitString encode(const CoderModel& model, const Pattern& psi, const BinSeq& beta) {
    if (psi.size() != beta.size()) throw ValidationError("pattern and bin sequence lengths differ");
    Encoder enc;
    CoderState st(model.rho.size());
    Sum raw;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        Table t = make_table(model, st);
        std::size_t e = 0;
        for (; e < t.events.size(); ++e)
            if (t.events[e].psi == psi.indices[j] && t.events[e].beta == beta[j]) break;
        if (e == t.events.size() || t.cum[e + 1] == t.cum[e])
            throw ValidationError("step " + std::to_string(j) + " has zero probability");
        raw += -std::log2(static_cast<long double>(next_symbol_prob(model, st, psi.indices[j], beta[j])));
        enc.code(t.cum[e], t.cum[e + 1]);
        st.update(psi.indices[j], beta[j]);
    }
    return enc.finish(std::ceil(static_cast<double>(raw.value()) - 1e-9));
}

std::pair<Pattern, BinSeq> decode(const CoderModel& model, const BitString& bits, std::size_t n) {
    std::size_t pos = 0;
    auto next_bit = [&]() -> u64 { return pos < bits.bit_count ? bits.bit(pos++) : (++pos, 0); };
    u64 d = 0;  // code value minus low
    for (int i = 0; i < kPrecision; ++i) d = (d << 1) | next_bit();
    u64 range = kTop;
    CoderState st(model.rho.size());
    std::vector<std::uint32_t> psi;
    BinSeq beta;
    for (std::size_t j = 0; j < n; ++j) {
        Table t = make_table(model, st);
        // Largest event whose lower edge is at or below d.
        std::size_t lo = 0, hi = t.events.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (scaled(range, t.cum[mid]) <= d) lo = mid; else hi = mid;
        }
        std::size_t e = lo;
        while (t.cum[e + 1] == t.cum[e]) ++e;  // skip empty events sharing the edge
        u64 elo = scaled(range, t.cum[e]), ehi = scaled(range, t.cum[e + 1]);
        if (d < elo || d >= ehi) throw DecodeError("code value outside every event");
        d -= elo;
        range = ehi - elo;
        while (range <= kHalfTop) {
            d = (d << 1) | next_bit();
            range <<= 1;
        }
        psi.push_back(t.events[e].psi);
        beta.push_back(t.events[e].beta);
        st.update(t.events[e].psi, t.events[e].beta);
    }
    Pattern p = n ? make_pattern(psi) : Pattern{};
    // Only the canonical stream for (psi, beta) is accepted.
    if (!(encode(model, p, beta) == bits)) throw DecodeError("bitstream is not a valid codeword");
    return {std::move(p), std::move(beta)};
}

}  // namespace pe
