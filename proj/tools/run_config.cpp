#include "run_config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "shortrate/errors.hpp"

namespace shortrate::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const Settings& s, const std::string& key) {
    const std::string& text = s.at(key);
    char* end = nullptr;
    errno = 0;
    const double x = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x))
        throw InvalidInput(key + ": expected a finite number, got '" + text + "'");
    return x;
}

std::uint64_t to_count(const Settings& s, const std::string& key) {
    const std::string& text = s.at(key);
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
        throw InvalidInput(key + ": expected a non-negative integer, got '" + text + "'");
    errno = 0;
    const unsigned long long x = std::strtoull(text.c_str(), nullptr, 10);
    if (errno == ERANGE) throw InvalidInput(key + ": integer out of range");
    return static_cast<std::uint64_t>(x);
}

bool to_bool(const Settings& s, const std::string& key) {
    const std::string& text = s.at(key);
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw InvalidInput(key + ": expected true or false, got '" + text + "'");
}

bool is_set(const Settings& s, const std::string& key) { return !s.at(key).empty(); }

// Optional numeric keys default to "" (unset).
double model_param(const Settings& s, const std::string& key, double fallback) {
    return is_set(s, key) ? to_double(s, key) : fallback;
}

ShortRateModel build_model(const Settings& s) {
    const std::string kind = s.at("model.kind");
    if (kind == "vasicek") {
        const Vasicek d;
        return Vasicek{model_param(s, "model.a", d.a), model_param(s, "model.b", d.b),
                       model_param(s, "model.sigma", d.sigma)};
    }
    if (kind == "interval") {
        const InvariantInterval d;
        return InvariantInterval{model_param(s, "model.a", d.a), model_param(s, "model.b", d.b),
                                 model_param(s, "model.kappa", d.kappa), model_param(s, "model.sigma", d.sigma)};
    }
    if (kind == "drifted_bm") {
        const DriftedBM d;
        return DriftedBM{model_param(s, "model.mu", d.mu), model_param(s, "model.sigma", d.sigma)};
    }
    if (kind == "geometric_bm") {
        const GeometricBM d;
        return GeometricBM{model_param(s, "model.mu", d.mu), model_param(s, "model.sigma", d.sigma)};
    }
    if (kind == "constant") return ConstantRate{model_param(s, "model.r", ConstantRate{}.r)};
    throw InvalidInput("model.kind: unknown model '" + kind + "'");
}

Variant build_variant(const std::string& v) {
    if (v == "A") return Variant::A;
    if (v == "B") return Variant::B;
    if (v == "C") return Variant::C;
    throw InvalidInput("problem.variant: expected A, B or C, got '" + v + "'");
}

ResolventBackend build_backend(const Settings& s, const ShortRateModel& model, std::uint64_t seed) {
    std::string kind = s.at("solver.backend");
    if (kind == "auto") kind = std::holds_alternative<InvariantInterval>(model) ? "fd" : "quadrature";
    if (kind == "quadrature") {
        QuadratureBackend q;
        q.dt = to_double(s, "quad.dt");
        q.dy = to_double(s, "quad.dy");
        q.t_max = to_double(s, "quad.t_max");
        q.y_halfwidth = to_double(s, "quad.y_halfwidth");
        q.mass_correction = to_bool(s, "quad.mass_correction");
        return q;
    }
    if (kind == "fd") {
        FiniteDifferenceBackend f;
        f.refine = to_count(s, "fd.refine");
        if (f.refine < 1) throw InvalidInput("fd.refine must be at least 1");
        return f;
    }
    if (kind == "mc") {
        MonteCarloBackend m;
        m.paths = to_count(s, "mc.paths");
        m.dt = to_double(s, "mc.dt");
        m.t_max = to_double(s, "mc.t_max");
        m.seed = seed;
        return m;
    }
    throw InvalidInput("solver.backend: expected auto, quadrature, fd or mc, got '" + kind + "'");
}

}  // namespace

const Settings& default_settings() {
    static const Settings defaults{
        {"model.kind", "vasicek"},
        {"model.a", ""},
        {"model.b", ""},
        {"model.sigma", ""},
        {"model.kappa", ""},
        {"model.mu", ""},
        {"model.r", ""},
        {"problem.alpha", "0.5"},
        {"problem.gamma", "1.5304"},
        {"problem.variant", "A"},
        {"solver.m_max", "16"},
        {"solver.n_max", "10"},
        {"solver.eps1", "1e-5"},
        {"solver.eps2", "1e-5"},
        {"solver.theta", ""},
        {"solver.backend", "auto"},
        {"solver.tol_n", "1e-6"},
        {"solver.tol_m", "1e-4"},
        {"solver.backend_tolerance", "1e-6"},
        {"solver.padding", ""},
        {"solver.kl_refine", "16"},
        {"grid.r_min", "0"},
        {"grid.r_max", "0.15"},
        {"grid.nodes", "76"},
        {"quad.dt", "0.01"},
        {"quad.dy", "0.002"},
        {"quad.t_max", "0"},
        {"quad.y_halfwidth", "0"},
        {"quad.mass_correction", "true"},
        {"fd.refine", "1"},
        {"mc.paths", "10000"},
        {"mc.dt", "0.01"},
        {"mc.t_max", "15"},
        {"paths.dt", "0.01"},
        {"paths.t_max", "40"},
        {"paths.n_paths", "10000"},
        {"paths.scheme", "exact"},
        {"sim.r0", "0.05"},
        {"sim.v", "3"},
        {"sim.solution", ""},
        {"sim.path_index", "0"},
        {"output.dir", "out"},
        {"output.plots", "true"},
        {"output.timing", "true"},
        {"run.seed", "1"},
        {"run.threads", "1"},
    };
    return defaults;
}

Settings profile_settings(const std::string& name) {
    if (name == "desk") return {};
    if (name == "paper")
        return {{"quad.dt", "0.001"},    {"quad.dy", "0.0002"}, {"solver.m_max", "65"},
                {"solver.n_max", "25"}, {"grid.nodes", "751"}};
    throw InvalidInput("unknown profile '" + name + "' (expected desk or paper)");
}

Settings parse_settings(const std::string& text, const std::string& origin) {
    Settings out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw InvalidInput(origin + ":" + std::to_string(lineno) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

Settings read_settings_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_settings(ss.str(), path);
}

std::pair<std::string, std::string> parse_assignment(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || trim(text.substr(0, eq)).empty())
        throw InvalidInput("--set expects key=value, got '" + text + "'");
    return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

void merge_settings(Settings& base, const Settings& overrides) {
    for (const auto& [k, v] : overrides) {
        if (!default_settings().contains(k)) throw InvalidInput("unknown configuration key '" + k + "'");
        base[k] = v;
    }
}

RunConfig build_config(const Settings& s) {
    for (const auto& [k, v] : s)
        if (!default_settings().contains(k)) throw InvalidInput("unknown configuration key '" + k + "'");
    RunConfig c;
    c.seed = to_count(s, "run.seed");
    c.threads = to_count(s, "run.threads");
    if (c.threads < 1) throw InvalidInput("run.threads must be at least 1");

    c.spec.model = build_model(s);
    c.spec.alpha = to_double(s, "problem.alpha");
    c.spec.gamma = to_double(s, "problem.gamma");
    c.spec.variant = build_variant(s.at("problem.variant"));
    validate(c.spec.model);
    if (!(c.spec.alpha > 0.0 && c.spec.alpha < 1.0)) throw InvalidInput("problem.alpha must lie in (0, 1)");
    if (!(c.spec.gamma >= 0.0) || !std::isfinite(c.spec.gamma)) throw InvalidInput("problem.gamma must be >= 0");

    SolverConfig& sv = c.solver;
    sv.m_max = to_count(s, "solver.m_max");
    sv.n_max = to_count(s, "solver.n_max");
    sv.eps1 = to_double(s, "solver.eps1");
    sv.eps2 = to_double(s, "solver.eps2");
    if (is_set(s, "solver.theta")) sv.theta = to_double(s, "solver.theta");
    sv.tol_n = to_double(s, "solver.tol_n");
    sv.tol_m = to_double(s, "solver.tol_m");
    sv.backend_tolerance = to_double(s, "solver.backend_tolerance");
    if (is_set(s, "solver.padding")) sv.padding = to_double(s, "solver.padding");
    sv.kl_refine = to_count(s, "solver.kl_refine");
    sv.grid = UniformGrid{to_double(s, "grid.r_min"), to_double(s, "grid.r_max"),
                          static_cast<std::size_t>(to_count(s, "grid.nodes"))};
    if (const auto* iv = std::get_if<InvariantInterval>(&c.spec.model)) {
        // The interval model is solved on its own state space.
        sv.grid.r_min = iv->a;
        sv.grid.r_max = iv->b;
    }
    sv.grid.validate();
    sv.backend = build_backend(s, c.spec.model, c.seed);
    sv.threads = c.threads;

    PathConfig& p = c.paths;
    p.dt = to_double(s, "paths.dt");
    p.t_max = to_double(s, "paths.t_max");
    p.n_paths = to_count(s, "paths.n_paths");
    p.seed = c.seed;
    const std::string scheme = s.at("paths.scheme");
    if (scheme == "exact") p.scheme = Scheme::ExactOU;
    else if (scheme == "euler") p.scheme = Scheme::Euler;
    else throw InvalidInput("paths.scheme: expected exact or euler, got '" + scheme + "'");
    if (!(p.dt > 0.0) || !(p.t_max >= p.dt)) throw InvalidInput("paths: need dt > 0 and t_max >= dt");

    c.r0 = to_double(s, "sim.r0");
    c.v = to_double(s, "sim.v");
    c.solution_file = s.at("sim.solution");
    c.path_index = to_count(s, "sim.path_index");
    c.output_dir = s.at("output.dir");
    if (c.output_dir.empty()) throw InvalidInput("output.dir must not be empty");
    c.emit_plots = to_bool(s, "output.plots");
    c.timing = to_bool(s, "output.timing");
    return c;
}

std::string render_settings(const Settings& settings) {
    std::string out;
    for (const auto& [k, v] : settings) out += k + "=" + v + "\n";
    return out;
}

}  // namespace shortrate::cli
