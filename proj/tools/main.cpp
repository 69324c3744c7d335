#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "pattern_entropy/coder.hpp"
#include "pattern_entropy/error.hpp"
#include "pattern_entropy/oracle.hpp"
#include "pattern_entropy/patterns.hpp"
#include "pattern_entropy/report.hpp"
#include "pattern_entropy/verify.hpp"

using namespace pe;
using nlohmann::json;

namespace {

enum Exit { ok = 0, validation = 1, property = 2, resource = 3 };

struct Common {
    std::string config, out, format;
    std::optional<std::uint64_t> seed;
};

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw ValidationError("cannot write " + c.out);
    f << text;
}

RunConfig config_for(const Common& c) {
    if (c.config.empty()) throw ValidationError("--config is required");
    RunConfig cfg = load_config(c.config);
    if (!c.format.empty()) cfg.format = c.format;
    if (c.seed) {
        cfg.seed = *c.seed;
        cfg.mc.seed = *c.seed;
    }
    return cfg;
}

std::string out_path(const Common& c, const RunConfig& cfg) { return c.out.empty() ? cfg.out : c.out; }

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON run configuration");
    sub->add_option("--out", c.out, "output file (default stdout)");
    sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--seed", c.seed, "random seed override");
}

int cmd_bounds(const Common& c) {
    RunConfig cfg = config_for(c);
    Report rep = run_bounds(cfg);
    Common o = c;
    o.out = out_path(c, cfg);
    emit(o, cfg.format == "json" ? to_json(rep).dump(2) + "\n" : to_csv(rep));
    for (const auto& row : rep.rows)
        if (!row.error.empty()) return resource;
    return ok;
}

int cmd_region(const Common& c) {
    RunConfig cfg = config_for(c);
    auto rows = run_region_sweep(cfg);
    Common o = c;
    o.out = out_path(c, cfg);
    emit(o, cfg.format == "json" ? region_to_json(rows).dump(2) + "\n" : region_to_csv(rows));
    return ok;
}

int cmd_oracle(const Common& c) {
    RunConfig cfg = config_for(c);
    auto theta = make_distribution(cfg.source).theta;
    auto n = static_cast<std::size_t>(cfg.n);
    if (n < 1 || static_cast<double>(n) != cfg.n) throw ValidationError("oracle needs an integer n >= 1");
    Grid g = build_grid(GridKind::eta, std::max(cfg.n, 2.0), cfg.epsilon);
    auto ex = exact_entropies(theta, g, n);
    auto pre = expected_codelength_by_prefix(theta, g, n);
    auto dec = codelength_decomposition(make_coder_model(theta, g), theta, ex.distinct_pmf);
    std::vector<std::pair<std::string, double>> kv{{"nH", ex.h_x_block},
                                                   {"h_pattern", ex.h_pattern},
                                                   {"h_pattern_grouped", ex.h_pattern_grouped},
                                                   {"h_joint", ex.h_joint},
                                                   {"expected_codelength", ex.expected_codelength},
                                                   {"expected_codelength_prefix", pre.expected_codelength},
                                                   {"large_letter_cost", dec.large_letter_cost},
                                                   {"first_occurrence_gain", dec.first_occurrence_gain},
                                                   {"r0", dec.r0},
                                                   {"r1", dec.r1},
                                                   {"sequences", static_cast<double>(ex.sequences)}};
    if (cfg.mc.enabled) {
        auto est = mc_pattern_entropy(theta, n, cfg.mc.samples, cfg.mc.seed);
        kv.push_back({"mc", est.estimate});
        kv.push_back({"mc_se", est.standard_error});
    }
    Common o = c;
    o.out = out_path(c, cfg);
    if (cfg.format == "json") {
        json j = json::object();
        for (const auto& [k, v] : kv) j[k] = v;
        emit(o, j.dump(2) + "\n");
    } else {
        std::string s = "quantity,value\n";
        for (const auto& [k, v] : kv) s += k + "," + format_number(v) + "\n";
        emit(o, s);
    }
    return ok;
}

int cmd_code(const Common& c) {
    RunConfig cfg = config_for(c);
    auto theta = make_distribution(cfg.source).theta;
    auto sequences = cfg.sequences;
    std::mt19937_64 rng(cfg.seed);
    for (std::size_t i = 0; i < cfg.random_sequences; ++i) {
        std::size_t len = cfg.sequence_length ? cfg.sequence_length : static_cast<std::size_t>(cfg.n);
        sequences.push_back(sample_sequence(theta, len, rng()));
    }
    if (sequences.empty()) throw ValidationError("code needs sequences or random_sequences");
    json out = json::array();
    std::ostringstream csv;
    csv << "index,n,pattern,bins,codelength,bit_count,hex,roundtrip\n";
    bool all_ok = true;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        const auto& x = sequences[i];
        if (x.empty()) throw ValidationError("empty sequence");
        for (auto s : x)
            if (s < 1 || s > theta.size()) throw ValidationError("symbol outside the alphabet");
        double n = std::max(cfg.n, static_cast<double>(x.size()));
        auto model = make_coder_model(theta, std::max(n, 2.0), cfg.epsilon);
        auto psi = extract_pattern(x);
        auto beta = bin_sequence(theta, model.grid, x);
        auto len = sequence_codelength(model, psi, beta);
        auto bits = encode(model, psi, beta);
        auto back = decode(model, bits, x.size());
        bool same = back.first == psi && back.second == beta;
        all_ok = all_ok && same;
        std::string bins;
        for (std::size_t j = 0; j < beta.size(); ++j) bins += (j ? " " : "") + std::to_string(beta[j]);
        out.push_back({{"index", i},
                       {"n", x.size()},
                       {"pattern", to_string(psi)},
                       {"bins", beta},
                       {"codelength", len.bits},
                       {"bit_count", bits.bit_count},
                       {"hex", to_hex(bits)},
                       {"roundtrip", same}});
        csv << i << ',' << x.size() << ",\"" << to_string(psi) << "\"," << bins << ',' << format_number(len.bits)
            << ',' << bits.bit_count << ',' << to_hex(bits) << ',' << (same ? "true" : "false") << '\n';
    }
    Common o = c;
    o.out = out_path(c, cfg);
    emit(o, cfg.format == "json" ? out.dump(2) + "\n" : csv.str());
    return all_ok ? ok : property;
}

int cmd_verify(const std::vector<std::string>& suites, std::uint64_t seed, const std::string& out_file) {
    std::ostringstream os;
    bool all = true;
    for (const auto& name : suites.empty() ? suite_names() : suites) {
        SuiteResult r = run_suite(name, seed);
        all = all && r.passed;
        os << (r.passed ? "PASS " : "FAIL ") << r.name << " checks=" << r.checks << " failures=" << r.failures
           << " time=" << r.seconds << "s\n";
        for (const auto& m : r.messages) os << "  " << m << "\n";
    }
    Common o;
    o.out = out_file;
    emit(o, os.str());
    return all ? ok : property;
}

int cmd_grid(const std::string& kind, double n, double eps) {
    std::cout << to_json(build_grid(grid_kind_from_string(kind), n, eps)).dump(2) << "\n";
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pattern entropy bounds, exact oracles and the bin-aware coder"};
    app.require_subcommand(1);

    Common bounds_opt, region_opt, oracle_opt, code_opt;
    auto* bounds = app.add_subcommand("bounds", "evaluate bounds for a source");
    add_common(bounds, bounds_opt);
    auto* region = app.add_subcommand("region", "sweep the alphabet size region");
    add_common(region, region_opt);
    auto* oracle = app.add_subcommand("oracle", "exact entropies by enumeration");
    add_common(oracle, oracle_opt);
    auto* code = app.add_subcommand("code", "encode and decode sequences");
    add_common(code, code_opt);

    std::vector<std::string> suites;
    std::uint64_t seed = kDefaultSeed;
    std::string verify_out;
    auto* verify = app.add_subcommand("verify", "run property suites");
    verify->add_option("--suite", suites, "suite names (default all)")->check(CLI::IsMember(suite_names()));
    verify->add_option("--seed", seed, "random seed");
    verify->add_option("--out", verify_out, "output file (default stdout)");

    std::string kind = "eta";
    double gn = 100, geps = 0.25;
    auto* grid = app.add_subcommand("grid", "dump a grid");
    grid->add_option("--kind", kind)->check(CLI::IsMember({"tau", "eta", "xi"}));
    grid->add_option("--n", gn);
    grid->add_option("--epsilon", geps);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? ok : validation;
    }
    try {
        if (*bounds) return cmd_bounds(bounds_opt);
        if (*region) return cmd_region(region_opt);
        if (*oracle) return cmd_oracle(oracle_opt);
        if (*code) return cmd_code(code_opt);
        if (*verify) return cmd_verify(suites, seed, verify_out);
        if (*grid) return cmd_grid(kind, gn, geps);
    } catch (const ResourceCapError& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return resource;
    } catch (const DecodeError& e) {
        std::cerr << "decode error: " << e.what() << "\n";
        return property;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return validation;
    }
    return ok;
}
