#include "pattern_entropy/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pattern_entropy/error.hpp"
#include "pattern_entropy/oracle.hpp"

namespace pe {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + " must be an object");
    for (const auto& [key, v] : obj.items())
        if (!allowed.count(key)) throw ValidationError("unknown key '" + key + "' in " + where);
}

template <class T>
T get(const json& obj, const std::string& key, const T& fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError("bad value for '" + key + "': " + e.what());
    }
}

SourceSpec parse_source(const json& s, double n) {
    reject_unknown(s, {"family", "probs", "k", "n", "nu", "mu", "phi0", "decay", "exponent"}, "source");
    SourceSpec spec;
    spec.family = family_from_string(get<std::string>(s, "family", "explicit"));
    spec.probs = get<std::vector<double>>(s, "probs", {});
    if (s.contains("k")) spec.k = get<double>(s, "k", 0.0);
    spec.n = get<double>(s, "n", n);
    spec.nu = get<double>(s, "nu", spec.nu);
    spec.mu = get<double>(s, "mu", spec.mu);
    spec.phi0 = get<double>(s, "phi0", spec.phi0);
    spec.decay = get<double>(s, "decay", spec.decay);
    spec.exponent = get<double>(s, "exponent", spec.exponent);
    if (spec.family == Family::explicit_probs && spec.probs.empty())
        throw ValidationError("explicit source needs probs");
    return spec;
}

S1Variant s1_from(const std::string& s) {
    if (s == "b1") return S1Variant::b1;
    if (s == "b2") return S1Variant::b2;
    throw ValidationError("s1 must be b1 or b2");
}

S2Variant s2_from(const std::string& s) {
    if (s == "b1") return S2Variant::b1;
    if (s == "b2") return S2Variant::b2;
    throw ValidationError("s2 must be b1 or b2");
}

}  // namespace

const std::vector<std::string>& known_bounds() {
    static const std::vector<std::string> names{"simple", "ub1", "ub1_tight", "lb2", "ub3", "c1", "c21",
                                                "c2_exact", "c2_loosened", "lb4", "contribution", "range"};
    return names;
}

RunConfig parse_config(const json& doc) {
    reject_unknown(doc, {"source", "n", "epsilon", "delta", "epsilon1", "n_eps1", "bounds", "oracle", "mc", "lb4",
                         "mu", "region", "sequences", "random_sequences", "sequence_length", "seed", "format", "out"},
                   "config");
    RunConfig c;
    c.n = get<double>(doc, "n", 0.0);
    c.epsilon = get<double>(doc, "epsilon", c.epsilon);
    c.delta = get<double>(doc, "delta", c.delta);
    if (doc.contains("epsilon1") && doc.contains("n_eps1"))
        throw ValidationError("give epsilon1 or n_eps1, not both");
    if (doc.contains("epsilon1")) {
        if (!(c.n > 1.0)) throw ValidationError("epsilon1 needs n > 1");
        c.n_eps1 = std::pow(c.n, get<double>(doc, "epsilon1", 0.0));
    }
    c.n_eps1 = get<double>(doc, "n_eps1", c.n_eps1);
    if (doc.contains("source")) c.source = parse_source(doc.at("source"), c.n);
    c.bounds = get<std::vector<std::string>>(doc, "bounds", c.bounds);
    for (const auto& b : c.bounds)
        if (std::find(known_bounds().begin(), known_bounds().end(), b) == known_bounds().end())
            throw ValidationError("unknown bound '" + b + "'");
    c.oracle = get<bool>(doc, "oracle", false);
    if (doc.contains("mc")) {
        const auto& m = doc.at("mc");
        reject_unknown(m, {"enabled", "samples", "seed"}, "mc");
        c.mc.enabled = get<bool>(m, "enabled", true);
        if (c.mc.enabled && !m.contains("samples")) throw ValidationError("mc needs samples when enabled");
        c.mc.samples = get<std::size_t>(m, "samples", c.mc.samples);
        c.mc.seed = get<std::uint64_t>(m, "seed", c.mc.seed);
    }
    if (doc.contains("lb4")) {
        const auto& l = doc.at("lb4");
        reject_unknown(l, {"s1", "s2", "vartheta_minus", "vartheta_plus", "s3_double_sum"}, "lb4");
        c.lb4.s1 = s1_from(get<std::string>(l, "s1", "b1"));
        c.lb4.s2 = s2_from(get<std::string>(l, "s2", "b1"));
        c.lb4.vartheta_minus = get<double>(l, "vartheta_minus", c.lb4.vartheta_minus);
        c.lb4.vartheta_plus = get<double>(l, "vartheta_plus", c.lb4.vartheta_plus);
        c.lb4.s3_double_sum = get<bool>(l, "s3_double_sum", false);
    }
    if (doc.contains("mu")) c.mu = get<double>(doc, "mu", 1.0);
    if (doc.contains("region")) {
        const auto& r = doc.at("region");
        reject_unknown(r, {"k_min", "k_max", "points", "ks"}, "region");
        if (r.contains("k_min")) c.region.k_min = get<double>(r, "k_min", 2.0);
        if (r.contains("k_max")) c.region.k_max = get<double>(r, "k_max", 2.0);
        c.region.points = get<std::size_t>(r, "points", c.region.points);
        c.region.ks = get<std::vector<double>>(r, "ks", {});
    }
    c.sequences = get<std::vector<std::vector<std::uint64_t>>>(doc, "sequences", {});
    c.random_sequences = get<std::size_t>(doc, "random_sequences", 0);
    c.sequence_length = get<std::size_t>(doc, "sequence_length", 0);
    c.seed = get<std::uint64_t>(doc, "seed", c.seed);
    c.format = get<std::string>(doc, "format", c.format);
    if (c.format != "csv" && c.format != "json") throw ValidationError("format must be csv or json");
    c.out = get<std::string>(doc, "out", "");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(doc);
}

Report run_bounds(const RunConfig& cfg) {
    if (!(cfg.n >= 1.0)) throw ValidationError("config needs n >= 1");
    Distribution dist = make_distribution(cfg.source);
    const ParamVector& theta = dist.theta;
    Report rep;
    rep.renormalization = dist.renormalization;
    rep.k = theta.size();
    if (dist.renormalization != 1.0)
        rep.notes.push_back("second level renormalized by " + format_number(dist.renormalization));

    std::optional<double> exact;
    std::string oracle_error;
    if (cfg.oracle) {
        try {
            auto n = static_cast<std::size_t>(cfg.n);
            if (static_cast<double>(n) != cfg.n) throw ValidationError("oracle needs an integer n");
            Grid g = build_grid(GridKind::eta, std::max(cfg.n, 2.0), cfg.epsilon);
            exact = exact_entropies(theta, g, n).h_pattern;
        } catch (const ResourceCapError& e) {
            oracle_error = std::string("oracle: ") + e.what();
        }
    }
    std::optional<McEstimate> mc;
    if (cfg.mc.enabled) {
        try {
            mc = mc_pattern_entropy(theta, static_cast<std::size_t>(cfg.n), cfg.mc.samples, cfg.mc.seed);
        } catch (const ResourceCapError& e) {
            oracle_error += (oracle_error.empty() ? "" : "; ") + std::string("mc: ") + e.what();
        }
    }

    auto push = [&](BoundReport b) {
        Row row{std::move(b), exact, std::nullopt, std::nullopt, oracle_error};
        if (mc) {
            row.mc = mc->estimate;
            row.mc_se = mc->standard_error;
        }
        rep.rows.push_back(std::move(row));
    };

    const double n = cfg.n, eps = cfg.epsilon;
    for (const auto& name : cfg.bounds) {
        try {
            if (name == "simple") {
                auto [lo, hi] = simple_bounds(theta, n);
                push(lo);
                push(hi);
            } else if (name == "ub1" || name == "ub1_tight") {
                push(upper_bound_ub1(theta, n, eps, name == "ub1_tight"));
            } else if (name == "lb2") {
                auto [a, b] = lower_bound_lb2(theta, n, eps);
                push(a);
                push(b);
            } else if (name == "ub3" || name == "c1" || name == "c21" || name == "c2_exact" || name == "c2_loosened") {
                push(upper_bound_ub3(theta, n, eps, ub3_variant_from_string(name)));
            } else if (name == "lb4") {
                push(lower_bound_lb4(theta, n, eps, cfg.lb4));
            } else if (name == "contribution") {
                auto [p1, p2] = contribution_limits(theta, n, eps, cfg.mu);
                push(p1);
                push(p2);
            } else if (name == "range") {
                auto r = range_bound(theta, n, eps, cfg.n_eps1);
                push(r.lower);
                push(r.upper_asymptotic);
                push(r.upper_nonasymptotic);
            }
        } catch (const ResourceCapError& e) {
            Row row{BoundReport(name), exact, std::nullopt, std::nullopt, std::string("resource cap: ") + e.what()};
            row.bound.valid = false;
            rep.rows.push_back(std::move(row));
        }
    }
    return rep;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string joined(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + v[i];
    return s;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

}  // namespace

std::string to_csv(const Report& r) {
    std::vector<std::string> term_cols;
    for (const auto& row : r.rows)
        for (const auto& t : row.bound.terms)
            if (std::find(term_cols.begin(), term_cols.end(), t.name) == term_cols.end()) term_cols.push_back(t.name);
    std::ostringstream os;
    os << "bound,value,valid,exact,mc,mc_se,residual_flags,notes,error";
    for (const auto& t : term_cols) os << ',' << csv_field("term:" + t);
    os << '\n';
    for (const auto& row : r.rows) {
        const auto& b = row.bound;
        os << csv_field(b.name) << ',' << (row.error.find("resource cap") == 0 ? "" : format_number(b.value)) << ','
           << (b.valid ? "true" : "false") << ',' << opt_number(row.exact) << ',' << opt_number(row.mc) << ','
           << opt_number(row.mc_se) << ',' << csv_field(joined(b.residual_flags)) << ','
           << csv_field(joined(b.notes)) << ',' << csv_field(row.error);
        for (const auto& col : term_cols) {
            os << ',';
            if (const Term* t = b.find(col)) os << format_number(t->value);
        }
        os << '\n';
    }
    return os.str();
}

namespace {

json number(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

}  // namespace

json to_json(const Report& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        json terms = json::array();
        for (const auto& t : row.bound.terms) terms.push_back({{"name", t.name}, {"value", number(t.value)}});
        json j{{"bound", row.bound.name},
               {"value", number(row.bound.value)},
               {"valid", row.bound.valid},
               {"terms", terms},
               {"residual_flags", row.bound.residual_flags},
               {"notes", row.bound.notes}};
        if (row.exact) j["exact"] = *row.exact;
        if (row.mc) {
            j["mc"] = *row.mc;
            j["mc_se"] = *row.mc_se;
        }
        if (!row.error.empty()) j["error"] = row.error;
        rows.push_back(j);
    }
    return {{"k", r.k}, {"renormalization", r.renormalization}, {"notes", r.notes}, {"rows", rows}};
}

std::vector<RangeResult> run_region_sweep(const RunConfig& cfg) {
    if (!(cfg.n > 1.0)) throw ValidationError("region sweep needs n > 1");
    std::vector<double> ks = cfg.region.ks;
    if (ks.empty()) {
        ks = default_region_ks(cfg.n, cfg.epsilon, cfg.n_eps1, cfg.region.points);
        if (cfg.region.k_min || cfg.region.k_max) {
            double lo = cfg.region.k_min.value_or(ks.front()), hi = cfg.region.k_max.value_or(ks.back());
            std::erase_if(ks, [&](double k) { return k < lo || k > hi; });
        }
    }
    return region_sweep(cfg.n, cfg.epsilon, cfg.n_eps1, ks);
}

std::string region_to_csv(const std::vector<RangeResult>& rows) {
    std::ostringstream os;
    os << "k,threshold,above_threshold,decrease_lower,decrease_lower_stirling,decrease_upper_asymptotic,"
          "decrease_upper_asymptotic_formula,decrease_upper_nonasymptotic,decrease_upper_nonasymptotic_raw,"
          "gamma,gamma_residual,beta_gamma,beta_opt,log2M_beta_gamma,log2M_beta_opt,"
          "upper_asymptotic,upper_nonasymptotic\n";
    for (const auto& r : rows) {
        os << format_number(r.k) << ',' << format_number(r.threshold) << ',' << (r.above_threshold ? "true" : "false")
           << ',' << format_number(r.decrease_lower) << ',' << format_number(r.decrease_lower_stirling) << ','
           << format_number(r.decrease_asymptotic) << ',' << format_number(r.decrease_asymptotic_formula) << ','
           << format_number(r.decrease_nonasymptotic) << ',' << format_number(r.decrease_nonasymptotic_raw) << ','
           << format_number(r.gamma.gamma) << ',' << format_number(r.gamma.residual) << ','
           << format_number(r.beta_gamma) << ',' << format_number(r.beta_opt) << ','
           << format_number(r.log2_M_at_beta_gamma) << ',' << format_number(r.log2_M_at_beta_opt) << ','
           << format_number(r.upper_asymptotic.value) << ',' << format_number(r.upper_nonasymptotic.value) << '\n';
    }
    return os.str();
}

json region_to_json(const std::vector<RangeResult>& rows) {
    json out = json::array();
    for (const auto& r : rows)
        out.push_back({{"k", r.k},
                       {"threshold", r.threshold},
                       {"above_threshold", r.above_threshold},
                       {"decrease_lower", r.decrease_lower},
                       {"decrease_lower_stirling", r.decrease_lower_stirling},
                       {"decrease_upper_asymptotic", r.decrease_asymptotic},
                       {"decrease_upper_asymptotic_formula", r.decrease_asymptotic_formula},
                       {"decrease_upper_nonasymptotic", r.decrease_nonasymptotic},
                       {"decrease_upper_nonasymptotic_raw", r.decrease_nonasymptotic_raw},
                       {"gamma", r.gamma.gamma},
                       {"gamma_residual", r.gamma.residual},
                       {"beta_gamma", r.beta_gamma},
                       {"beta_opt", r.beta_opt},
                       {"upper_asymptotic", number(r.upper_asymptotic.value)},
                       {"upper_nonasymptotic", number(r.upper_nonasymptotic.value)}});
    return out;
}

json to_json(const Grid& g) {
    return {{"kind", to_string(g.kind)},
            {"n", g.n},
            {"epsilon", g.epsilon},
            {"B", g.B},
            {"A", g.A},
            {"B_closed_form", closed_form_B(g.kind, g.n, g.epsilon)},
            {"A_closed_form", closed_form_A(g.kind, g.n, g.epsilon)},
            {"eta_shift_floor_n^(3eps/2)", g.shift_D},
            {"spacing_d_floor_n^(eps/2)-1", g.spacing_d},
            {"terminal_coincides", g.terminal_coincides},
            {"flags", g.flags},
            {"points", g.points.size() <= 64 ? json(g.points) : json(g.points.size())}};
}

json to_json(const BinStats& s) {
    json bins = json::array();
    for (std::size_t b = 0; b < s.count.size(); ++b) {
        if (!s.count[b]) continue;
        json j{{"bin", b}, {"count", s.count[b]}, {"phi", s.phi[b]}, {"ell", s.ell[b]}, {"L", s.L[b]}};
        if (!s.kappa_prime.empty()) j["kappa_prime"] = s.kappa_prime[b];
        bins.push_back(j);
    }
    return {{"bins", bins}, {"k01", s.k01}, {"phi01", s.phi01}, {"ell01", s.ell01}, {"L01", s.L01}};
}

}  // namespace pe
