#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shortrate/hjb_solver.hpp"
#include "shortrate/model.hpp"
#include "shortrate/simulate.hpp"

namespace shortrate::cli {

/// Flat dotted-key settings, e.g. "model.kind" -> "vasicek".
using Settings = std::map<std::string, std::string>;

struct RunConfig {
    ProblemSpec spec;
    SolverConfig solver;
    PathConfig paths;
    std::string output_dir = "out";
    bool emit_plots = true;
    bool timing = true;  // false writes 0 for wall-clock columns
    double r0 = 0.05;
    double v = 3.0;
    std::string solution_file;  // empty: <output_dir>/solution.csv
    std::uint64_t path_index = 0;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

/// Every recognised key with its default value.
const Settings& default_settings();

/// Keys changed by a named profile ("desk" or "paper").
Settings profile_settings(const std::string& name);

/// Parses "key = value" lines; '#' starts a comment. Throws InvalidInput on malformed lines.
Settings parse_settings(const std::string& text, const std::string& origin = "config");
Settings read_settings_file(const std::string& path);

/// Splits "key=value" from a --set flag.
std::pair<std::string, std::string> parse_assignment(const std::string& text);

/// Applies `overrides` on top of `base`; unknown keys are rejected.
void merge_settings(Settings& base, const Settings& overrides);

/// Builds the typed configuration. Model parameters not given take the kind's own defaults.
RunConfig build_config(const Settings& settings);

/// Keys rendered as "key=value" lines, sorted.
std::string render_settings(const Settings& settings);

}  // namespace shortrate::cli
