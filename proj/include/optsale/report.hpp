#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "optsale/verify.hpp"

namespace optsale {

struct GridSpec {
    double min;
    double max;
    int points;
    bool log_spacing = false;

    GridSpec(double min_, double max_, int points_, bool log_spacing_ = false);
    std::vector<double> values() const;
};

/// Resolved run configuration: problem + grids + MC settings + output. Built
/// from a flat dotted-key config file, with any key overridable on the
/// command line.
struct RunConfig {
    ProblemSpec problem;
    std::optional<GridSpec> grid;           // price grid (curve mode "price")
    std::optional<GridSpec> quantity_grid;  // curve modes "quantity", "price_quantity"
    std::string curve_mode = "price";
    std::vector<double> sweep_gammas;       // exponential-utility columns in quantity mode
    McConfig mc;
    std::vector<double> verify_prices;      // empty: threshold * {0.8, 0.9, 0.97}
    std::optional<GridSpec> verify_sweep;
    std::optional<double> override_threshold;
    std::string output_path;      // empty: stdout only
    std::string output_format = "csv";  // csv | json

    explicit RunConfig(ProblemSpec p) : problem(std::move(p)), mc() {}
};

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines ('#' comments). Later duplicates win.
KeyValues parse_key_values(const std::string& text);

RunConfig build_run_config(const KeyValues& kv);
RunConfig load_run_config(const std::string& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides);

/// Fixed CSV float formatting (12 significant digits).
std::string format_number(double v);

struct CurveRow {
    double price;
    double utility;
    double value;
    double certainty_equivalent;
    double premium;
};

/// Data behind a value/CE curve: rows sorted by price, each satisfying
/// value >= utility and premium >= 0, plus a metadata echo of the resolved
/// problem and solved threshold/coefficient.
struct CurveTable {
    nlohmann::json metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::string to_csv() const;
    nlohmann::json to_json() const;
};

nlohmann::json solve_summary(const Solution& sol);

nlohmann::json run_solve(const RunConfig& cfg);
CurveTable run_curve(const RunConfig& cfg);

struct VerifyOutcome {
    nlohmann::json report;
    bool passed;
};

/// Runs the pasting audit, the variational-inequality grid, Monte-Carlo
/// agreement at the configured prices, and (optionally) the threshold sweep;
/// `override_threshold` replaces the traded threshold in the Monte-Carlo
/// checks so deliberate perturbations are flagged.
VerifyOutcome run_verify(const RunConfig& cfg);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace optsale
