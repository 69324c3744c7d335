#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include "pattern_entropy/bounds.hpp"
#include "pattern_entropy/distributions.hpp"

namespace pe {

struct McSettings {
    bool enabled = false;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
};

struct RegionSettings {
    std::optional<double> k_min, k_max;
    std::size_t points = 200;
    std::vector<double> ks;
};

struct RunConfig {
    SourceSpec source;
    double n = 0.0;
    double epsilon = 0.25;
    double delta = 0.0;
    double n_eps1 = 20.0;  // n^{epsilon_1}
    std::vector<std::string> bounds{"simple"};
    bool oracle = false;
    McSettings mc;
    Lb4Options lb4;
    std::optional<double> mu;
    RegionSettings region;
    std::vector<std::vector<std::uint64_t>> sequences;  // for the code command
    std::size_t random_sequences = 0;
    std::size_t sequence_length = 0;
    std::uint64_t seed = 1;
    std::string format = "csv";
    std::string out;
};

// Strict: unknown keys and type mismatches raise ValidationError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);
const std::vector<std::string>& known_bounds();

struct Row {
    BoundReport bound;
    std::optional<double> exact;  // exact pattern entropy
    std::optional<double> mc, mc_se;
    std::string error;            // per-row failure, e.g. a resource cap
};

struct Report {
    std::vector<Row> rows;
    double renormalization = 1.0;
    std::uint64_t k = 0;
    std::vector<std::string> notes;
};

Report run_bounds(const RunConfig& cfg);
std::string to_csv(const Report& r);
nlohmann::json to_json(const Report& r);

std::vector<RangeResult> run_region_sweep(const RunConfig& cfg);
std::string region_to_csv(const std::vector<RangeResult>& rows);
nlohmann::json region_to_json(const std::vector<RangeResult>& rows);

// Numbers are written with 17 significant digits.
std::string format_number(double v);

nlohmann::json to_json(const Grid& g);
nlohmann::json to_json(const BinStats& s);

}  // namespace pe
