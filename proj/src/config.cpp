#include "cavsim/config.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include "cavsim/csv.hpp"
#include "cavsim/errors.hpp"
#include "cavsim/rates.hpp"

namespace cavsim {

std::string to_string(SampleMode mode) {
    return mode == SampleMode::kLinear ? "linear" : "log";
}

void SimConfig::validate() const {
    if (n_atoms < 1) throw ConfigError("n_atoms must be >= 1");
    if (!(nbar >= 0.0)) throw ConfigError("nbar must be >= 0");
    if (!(delta_c < 0.0))
        throw ConfigError(
            "delta_c must be < 0: the stationary distribution exp(-beta H) "
            "requires a red-detuned cavity");
    if (!(omega_r > 0.0)) throw ConfigError("omega_r must be > 0");
    if (!(omega_r < 1.0))
        throw ConfigError("omega_r must be < 1 (semiclassical regime)");
    if (!(temp_init >= 0.0)) throw ConfigError("temp_init must be >= 0");
    if (!(dt > 0.0)) throw ConfigError("dt must be > 0");
    if (!(t_end >= dt)) throw ConfigError("t_end must be >= dt");
    if (n_traj < 1) throw ConfigError("n_traj must be >= 1");
    if (sample_points < 1) throw ConfigError("sample_points must be >= 1");
}

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
};

[[noreturn]] void fail(int line, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ": " + msg);
}

double parse_number(const RawEntry& e, const std::string& key) {
    try {
        std::size_t used = 0;
        const double v = std::stod(e.value, &used);
        if (used != e.value.size())
            fail(e.line, "trailing characters in value for '" + key + "'");
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        fail(e.line, "expected a number for '" + key + "', got '" + e.value + "'");
    }
}

std::int64_t parse_integer(const RawEntry& e, const std::string& key) {
    const double v = parse_number(e, key);
    if (v != std::floor(v))
        fail(e.line, "expected an integer for '" + key + "'");
    return static_cast<std::int64_t>(v);
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

SimConfig parse_config(const std::string& text) {
    static const std::map<std::string, int> known = {
        {"n_atoms", 0},      {"nbar", 0},    {"nbar_rel", 0}, {"delta_c", 0},
        {"omega_r", 0},      {"temp_init", 0}, {"dt", 0},     {"t_end", 0},
        {"n_traj", 0},       {"seed", 0},    {"sample_mode", 0},
        {"sample_points", 0}, {"gamma_hz", 0}, {"delta_a_over_gamma", 0}};

    std::map<std::string, RawEntry> entries;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(lineno, "expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            fail(lineno, "expected 'key = value', got '" + line + "'");
        if (!known.count(key)) fail(lineno, "unknown key '" + key + "'");
        if (entries.count(key)) fail(lineno, "duplicate key '" + key + "'");
        entries[key] = RawEntry{value, lineno};
    }

    auto take = [&](const std::string& key) -> std::optional<RawEntry> {
        auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        return it->second;
    };
    auto require = [&](const std::string& key) -> RawEntry {
        auto e = take(key);
        if (!e) throw ConfigError("missing required key '" + key + "'");
        return *e;
    };

    SimConfig cfg;
    cfg.n_atoms = static_cast<int>(parse_integer(require("n_atoms"), "n_atoms"));
    cfg.delta_c = parse_number(require("delta_c"), "delta_c");

    const auto nbar_abs = take("nbar");
    const auto nbar_rel = take("nbar_rel");
    if (nbar_abs && nbar_rel)
        fail(nbar_rel->line, "'nbar' and 'nbar_rel' are mutually exclusive");
    if (!nbar_abs && !nbar_rel)
        throw ConfigError("missing required key 'nbar' (or 'nbar_rel')");

    if (auto e = take("omega_r")) cfg.omega_r = parse_number(*e, "omega_r");
    if (auto e = take("temp_init")) cfg.temp_init = parse_number(*e, "temp_init");
    if (auto e = take("dt")) cfg.dt = parse_number(*e, "dt");
    if (auto e = take("t_end")) cfg.t_end = parse_number(*e, "t_end");
    if (auto e = take("n_traj"))
        cfg.n_traj = static_cast<int>(parse_integer(*e, "n_traj"));
    if (auto e = take("seed")) {
        const auto v = parse_integer(*e, "seed");
        if (v < 0) fail(e->line, "seed must be non-negative");
        cfg.seed = static_cast<std::uint64_t>(v);
    }
    if (auto e = take("sample_mode")) {
        if (e->value == "linear")
            cfg.sample_mode = SampleMode::kLinear;
        else if (e->value == "log")
            cfg.sample_mode = SampleMode::kLog;
        else
            fail(e->line, "sample_mode must be 'linear' or 'log'");
    }
    if (auto e = take("sample_points"))
        cfg.sample_points = static_cast<int>(parse_integer(*e, "sample_points"));
    if (auto e = take("gamma_hz")) cfg.gamma_hz = parse_number(*e, "gamma_hz");
    if (auto e = take("delta_a_over_gamma"))
        cfg.delta_a_over_gamma = parse_number(*e, "delta_a_over_gamma");

    if (nbar_abs) {
        cfg.nbar = parse_number(*nbar_abs, "nbar");
    } else {
        const double rel = parse_number(*nbar_rel, "nbar_rel");
        if (!(cfg.delta_c < 0.0))
            fail(nbar_rel->line, "nbar_rel needs delta_c < 0 to derive nbar_c");
        cfg.nbar = rel * derive_rates(0.0, cfg.delta_c, cfg.omega_r, 1).nbar_c;
    }

    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        // attribute constraint violations to the offending line when the
        // violated field was given explicitly
        const std::string msg = e.what();
        for (const auto& [key, entry] : entries) {
            const std::string name = key == "nbar_rel" ? "nbar" : key;
            if (msg.rfind(name, 0) == 0) fail(entry.line, msg);
        }
        throw;
    }
    return cfg;
}

std::string render_config(const SimConfig& cfg) {
    std::ostringstream out;
    out << "n_atoms = " << cfg.n_atoms << "\n";
    out << "nbar = " << format_double(cfg.nbar) << "\n";
    out << "delta_c = " << format_double(cfg.delta_c) << "\n";
    out << "omega_r = " << format_double(cfg.omega_r) << "\n";
    out << "temp_init = " << format_double(cfg.temp_init) << "\n";
    out << "dt = " << format_double(cfg.dt) << "\n";
    out << "t_end = " << format_double(cfg.t_end) << "\n";
    out << "n_traj = " << cfg.n_traj << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "sample_mode = " << to_string(cfg.sample_mode) << "\n";
    out << "sample_points = " << cfg.sample_points << "\n";
    out << "gamma_hz = " << format_double(cfg.gamma_hz) << "\n";
    out << "delta_a_over_gamma = " << format_double(cfg.delta_a_over_gamma)
        << "\n";
    return out.str();
}

bool operator==(const SimConfig& a, const SimConfig& b) {
    return a.n_atoms == b.n_atoms && a.nbar == b.nbar &&
           a.delta_c == b.delta_c && a.omega_r == b.omega_r &&
           a.temp_init == b.temp_init && a.dt == b.dt && a.t_end == b.t_end &&
           a.n_traj == b.n_traj && a.seed == b.seed &&
           a.sample_mode == b.sample_mode &&
           a.sample_points == b.sample_points && a.gamma_hz == b.gamma_hz &&
           a.delta_a_over_gamma == b.delta_a_over_gamma;
}

}  // namespace cavsim
