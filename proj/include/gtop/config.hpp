#pragma once

// Run and sweep configuration: a flat, human-editable key-value document
// with [section] headers, `key = value` lines and `#` comments. Sections
// mirror the domain types one to one; see configs/ for commented examples.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <gtop/charts.hpp>
#include <gtop/convergence.hpp>
#include <gtop/friction.hpp>
#include <gtop/params.hpp>
#include <gtop/state.hpp>
#include <gtop/trajectory.hpp>

namespace gtop {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

struct ConfigEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

/// Parsed key-value document; keys may repeat within a section (needed for
/// sweep axes).
class Document {
  public:
    std::string source_name;

    void insert(const std::string& section, const std::string& key, ConfigEntry entry) {
        section_lines_.try_emplace(section, entry.line);
        entries_[section][key].push_back(std::move(entry));
    }

    bool has_section(const std::string& section) const { return entries_.count(section) > 0; }

    std::optional<std::string> get(const std::string& section, const std::string& key) {
        auto sec = entries_.find(section);
        if (sec == entries_.end()) return std::nullopt;
        auto it = sec->second.find(key);
        if (it == sec->second.end()) return std::nullopt;
        if (it->second.size() > 1)
            fail(it->second[1].line, "duplicate key '" + key + "' in [" + section + "]");
        it->second[0].used = true;
        return it->second[0].value;
    }

    std::vector<std::string> get_all(const std::string& section, const std::string& key) {
        std::vector<std::string> out;
        auto sec = entries_.find(section);
        if (sec == entries_.end()) return out;
        auto it = sec->second.find(key);
        if (it == sec->second.end()) return out;
        for (auto& e : it->second) {
            e.used = true;
            out.push_back(e.value);
        }
        return out;
    }

    double get_double(const std::string& section, const std::string& key, double fallback) {
        auto v = get(section, key);
        return v ? to_double(section, key, *v) : fallback;
    }

    double require_double(const std::string& section, const std::string& key) {
        auto v = get(section, key);
        if (!v) fail(section_line(section), "[" + section + "] is missing required key '" + key + "'");
        return to_double(section, key, *v);
    }

    long get_long(const std::string& section, const std::string& key, long fallback) {
        auto v = get(section, key);
        if (!v) return fallback;
        try {
            size_t pos = 0;
            long out = std::stol(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            return out;
        } catch (...) {
            fail(line_of(section, key), "value of '" + key + "' is not an integer: " + *v);
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) {
        auto v = get(section, key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        fail(line_of(section, key), "value of '" + key + "' is not a boolean: " + *v);
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) {
        auto v = get(section, key);
        return v ? *v : fallback;
    }

    /// Every key must have been consumed; anything left is a typo.
    void reject_unused(const std::vector<std::string>& known_sections) const {
        for (const auto& [section, keys] : entries_) {
            bool known = false;
            for (const auto& s : known_sections) known = known || s == section;
            if (!known) fail(section_line(section), "unknown section [" + section + "]");
            for (const auto& [key, list] : keys)
                for (const auto& e : list)
                    if (!e.used) fail(e.line, "unknown key '" + key + "' in [" + section + "]");
        }
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(source_name + ":" + std::to_string(line) + ": " + msg);
    }

    double to_double(const std::string& section, const std::string& key, const std::string& v) {
        try {
            size_t pos = 0;
            double out = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return out;
        } catch (...) {
            fail(line_of(section, key), "value of '" + key + "' is not a number: " + v);
        }
    }

    int line_of(const std::string& section, const std::string& key) const {
        auto sec = entries_.find(section);
        if (sec == entries_.end()) return 0;
        auto it = sec->second.find(key);
        return it == sec->second.end() ? 0 : it->second[0].line;
    }

    int section_line(const std::string& section) const {
        auto it = section_lines_.find(section);
        return it == section_lines_.end() ? 0 : it->second;
    }

  private:
    std::map<std::string, std::map<std::string, std::vector<ConfigEntry>>> entries_;
    std::map<std::string, int> section_lines_;
};

inline std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

inline Document parse_document(const std::string& text, const std::string& source_name) {
    Document doc;
    doc.source_name = source_name;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') doc.fail(lineno, "malformed section header: " + line);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) doc.fail(lineno, "empty section name");
            doc.insert(section, "", {"", lineno, true});
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) doc.fail(lineno, "expected 'key = value': " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) doc.fail(lineno, "empty key");
        if (section.empty()) doc.fail(lineno, "key '" + key + "' appears before any [section]");
        doc.insert(section, key, {value, lineno, false});
    }
    return doc;
}

} // namespace detail

struct FrictionSpec {
    std::string kind = "constant"; ///< extensible tag; only "constant" today
    double mu = 0.0;
};

struct RawParams {
    double m = 1.0, g = 9.81, l = 0.1, I1 = 0.002, I3 = 0.001;
    std::optional<double> I1star_override; ///< diagnostic knob for negative controls
    double den_guard = 1e-12;
    double sin_guard = 1e-8;
};

struct InitialEuler {
    EulerState state;
    double phi = 0.0;
};

struct InitialVector {
    VectorState state;
};

struct OutputSpec {
    std::string trajectory_csv; ///< empty = skip
    std::string report_json;
    std::string summary_csv; ///< sweep summary destination
};

struct RunConfig {
    RawParams raw;
    FrictionSpec friction;
    std::variant<InitialEuler, InitialVector> initial;
    IntegratorConfig integrator;
    ConvergenceSettings convergence;
    OutputSpec outputs;

    PhysicalParams make_params() const {
        PhysicalParams p = raw.I1star_override
                               ? PhysicalParams::with_pivot_inertia_override(
                                     raw.m, raw.g, raw.l, raw.I1, raw.I3, *raw.I1star_override)
                               : PhysicalParams(raw.m, raw.g, raw.l, raw.I1, raw.I3);
        p.den_guard = raw.den_guard;
        p.sin_guard = raw.sin_guard;
        return p;
    }

    FrictionModel make_friction() const {
        if (friction.kind != "constant")
            throw ConfigError("unsupported friction kind: " + friction.kind);
        return FrictionModel::constant(friction.mu);
    }

    VectorState make_initial(const PhysicalParams& p) const {
        if (std::holds_alternative<InitialEuler>(initial)) {
            const auto& e = std::get<InitialEuler>(initial);
            return euler_to_vector(e.state, e.phi, p);
        }
        return std::get<InitialVector>(initial).state;
    }
};

struct SweepAxis {
    std::string path; ///< dotted parameter path, e.g. "initial_euler.omega3"
    std::vector<double> values;
};

struct SweepConfig {
    RunConfig base;
    std::vector<SweepAxis> axes;
    int parallelism = 1;
    long cap = 10000; ///< upper bound on the Cartesian product size
};

/// Assigns `value` to the scalar field addressed by a dotted path. Used by
/// sweep axes; throws ConfigError for unknown paths or a mismatched initial
/// form.
inline void apply_override(RunConfig& cfg, const std::string& path, double value) {
    const auto is = [&](const char* p) { return path == p; };

    if (is("params.m")) cfg.raw.m = value;
    else if (is("params.g")) cfg.raw.g = value;
    else if (is("params.l")) cfg.raw.l = value;
    else if (is("params.I1")) cfg.raw.I1 = value;
    else if (is("params.I3")) cfg.raw.I3 = value;
    else if (is("friction.mu")) cfg.friction.mu = value;
    else if (is("integrator.rel_tol")) cfg.integrator.rel_tol = value;
    else if (is("integrator.abs_tol")) cfg.integrator.abs_tol = value;
    else if (is("integrator.h_init")) cfg.integrator.h_init = value;
    else if (is("integrator.h_max")) cfg.integrator.h_max = value;
    else if (is("integrator.t_end")) cfg.integrator.t_end = value;
    else if (is("integrator.sample_dt")) cfg.integrator.sample_dt = value;
    else if (is("convergence.tol_v")) cfg.convergence.tol_v = value;
    else if (is("convergence.tol_axis")) cfg.convergence.tol_axis = value;
    else if (path.rfind("initial_euler.", 0) == 0) {
        if (!std::holds_alternative<InitialEuler>(cfg.initial))
            throw ConfigError("override path '" + path + "' requires an [initial_euler] config");
        auto& e = std::get<InitialEuler>(cfg.initial);
        const std::string f = path.substr(14);
        if (f == "theta") e.state.theta = value;
        else if (f == "thetadot") e.state.thetadot = value;
        else if (f == "phidot") e.state.phidot = value;
        else if (f == "omega3") e.state.omega3 = value;
        else if (f == "nux") e.state.nux = value;
        else if (f == "nuy") e.state.nuy = value;
        else if (f == "phi") e.phi = value;
        else throw ConfigError("unknown override path: " + path);
    } else if (path.rfind("initial_vector.", 0) == 0) {
        if (!std::holds_alternative<InitialVector>(cfg.initial))
            throw ConfigError("override path '" + path + "' requires an [initial_vector] config");
        auto& v = std::get<InitialVector>(cfg.initial).state;
        const std::string f = path.substr(15);
        if (f == "rdot_x") v.rdot.x = value;
        else if (f == "rdot_y") v.rdot.y = value;
        else if (f == "L_x") v.L.x = value;
        else if (f == "L_y") v.L.y = value;
        else if (f == "L_z") v.L.z = value;
        else if (f == "axis_x") v.axis.x = value;
        else if (f == "axis_y") v.axis.y = value;
        else if (f == "axis_z") v.axis.z = value;
        else throw ConfigError("unknown override path: " + path);
    } else {
        throw ConfigError("unknown override path: " + path);
    }
}

namespace detail {

inline RunConfig parse_run_sections(Document& doc) {
    RunConfig cfg;

    for (const char* req : {"params", "friction", "integrator"})
        if (!doc.has_section(req))
            throw ConfigError(doc.source_name + ": missing required section [" +
                              std::string(req) + "]");

    cfg.raw.m = doc.require_double("params", "m");
    cfg.raw.g = doc.require_double("params", "g");
    cfg.raw.l = doc.require_double("params", "l");
    cfg.raw.I1 = doc.require_double("params", "I1");
    cfg.raw.I3 = doc.require_double("params", "I3");
    if (auto v = doc.get("params", "I1star_override"))
        cfg.raw.I1star_override = doc.to_double("params", "I1star_override", *v);
    cfg.raw.den_guard = doc.get_double("params", "den_guard", cfg.raw.den_guard);
    cfg.raw.sin_guard = doc.get_double("params", "sin_guard", cfg.raw.sin_guard);

    cfg.friction.kind = doc.get_string("friction", "kind", "constant");
    cfg.friction.mu = doc.require_double("friction", "mu");
    if (cfg.friction.mu < 0.0)
        doc.fail(doc.line_of("friction", "mu"), "mu must be >= 0");

    const bool has_euler = doc.has_section("initial_euler");
    const bool has_vector = doc.has_section("initial_vector");
    if (has_euler == has_vector)
        throw ConfigError(doc.source_name +
                          ": exactly one of [initial_euler] or [initial_vector] must be present");
    if (has_euler) {
        InitialEuler e;
        e.state.theta = doc.require_double("initial_euler", "theta");
        e.state.thetadot = doc.get_double("initial_euler", "thetadot", 0.0);
        e.state.phidot = doc.get_double("initial_euler", "phidot", 0.0);
        e.state.omega3 = doc.get_double("initial_euler", "omega3", 0.0);
        e.state.nux = doc.get_double("initial_euler", "nux", 0.0);
        e.state.nuy = doc.get_double("initial_euler", "nuy", 0.0);
        e.phi = doc.get_double("initial_euler", "phi", 0.0);
        cfg.initial = e;
    } else {
        InitialVector v;
        v.state.rdot.x = doc.get_double("initial_vector", "rdot_x", 0.0);
        v.state.rdot.y = doc.get_double("initial_vector", "rdot_y", 0.0);
        v.state.L.x = doc.get_double("initial_vector", "L_x", 0.0);
        v.state.L.y = doc.get_double("initial_vector", "L_y", 0.0);
        v.state.L.z = doc.get_double("initial_vector", "L_z", 0.0);
        v.state.axis.x = doc.require_double("initial_vector", "axis_x");
        v.state.axis.y = doc.require_double("initial_vector", "axis_y");
        v.state.axis.z = doc.require_double("initial_vector", "axis_z");
        cfg.initial = v;
    }

    cfg.integrator.rel_tol = doc.get_double("integrator", "rel_tol", cfg.integrator.rel_tol);
    cfg.integrator.abs_tol = doc.get_double("integrator", "abs_tol", cfg.integrator.abs_tol);
    cfg.integrator.h_init = doc.get_double("integrator", "h_init", cfg.integrator.h_init);
    cfg.integrator.h_max = doc.get_double("integrator", "h_max", cfg.integrator.h_max);
    cfg.integrator.t_end = doc.require_double("integrator", "t_end");
    cfg.integrator.sample_dt = doc.require_double("integrator", "sample_dt");
    cfg.integrator.detect_convergence =
        doc.get_bool("integrator", "detect_convergence", cfg.integrator.detect_convergence);

    cfg.convergence.tol_v = doc.get_double("convergence", "tol_v", cfg.convergence.tol_v);
    cfg.convergence.tol_axis = doc.get_double("convergence", "tol_axis", cfg.convergence.tol_axis);
    cfg.convergence.window =
        static_cast<int>(doc.get_long("convergence", "window", cfg.convergence.window));
    if (cfg.convergence.window < 1 || !(cfg.convergence.tol_v > 0.0) ||
        !(cfg.convergence.tol_axis > 0.0))
        throw ConfigError(doc.source_name + ": [convergence] settings must be positive");

    cfg.outputs.trajectory_csv = doc.get_string("outputs", "trajectory_csv", "");
    cfg.outputs.report_json = doc.get_string("outputs", "report_json", "");
    cfg.outputs.summary_csv = doc.get_string("outputs", "summary_csv", "");

    // Surface invalid physical/integration settings as config errors.
    try {
        cfg.make_params();
        cfg.integrator.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(doc.source_name + ": " + e.what());
    }
    return cfg;
}

inline std::vector<std::string> run_sections() {
    return {"params",  "friction",    "initial_euler", "initial_vector",
            "integrator", "convergence", "outputs"};
}

} // namespace detail

inline RunConfig parse_run_config(const std::string& text, const std::string& source_name) {
    detail::Document doc = detail::parse_document(text, source_name);
    RunConfig cfg = detail::parse_run_sections(doc);
    doc.reject_unused(detail::run_sections());
    return cfg;
}

inline SweepConfig parse_sweep_config(const std::string& text, const std::string& source_name) {
    detail::Document doc = detail::parse_document(text, source_name);
    SweepConfig sweep;
    sweep.base = detail::parse_run_sections(doc);
    if (!doc.has_section("sweep"))
        throw ConfigError(source_name + ": missing required section [sweep]");

    for (const std::string& axis_spec : doc.get_all("sweep", "axis")) {
        auto colon = axis_spec.find(':');
        if (colon == std::string::npos)
            throw ConfigError(source_name + ": axis must look like 'path: v1, v2, ...', got '" +
                              axis_spec + "'");
        SweepAxis axis;
        axis.path = detail::trim(axis_spec.substr(0, colon));
        std::string rest = axis_spec.substr(colon + 1);
        std::istringstream vs(rest);
        std::string tok;
        while (std::getline(vs, tok, ',')) {
            tok = detail::trim(tok);
            if (tok.empty()) continue;
            try {
                size_t pos = 0;
                axis.values.push_back(std::stod(tok, &pos));
                if (pos != tok.size()) throw std::invalid_argument("");
            } catch (...) {
                throw ConfigError(source_name + ": bad axis value '" + tok + "' for " + axis.path);
            }
        }
        if (axis.values.empty())
            throw ConfigError(source_name + ": axis '" + axis.path + "' has no values");
        // Validate the path now, not at run time.
        RunConfig probe = sweep.base;
        apply_override(probe, axis.path, axis.values.front());
        sweep.axes.push_back(std::move(axis));
    }
    if (sweep.axes.empty()) throw ConfigError(source_name + ": [sweep] defines no axis");

    sweep.parallelism = static_cast<int>(doc.get_long("sweep", "parallelism", 1));
    if (sweep.parallelism < 1)
        throw ConfigError(source_name + ": parallelism must be a positive integer");
    sweep.cap = doc.get_long("sweep", "cap", sweep.cap);

    long product = 1;
    for (const auto& axis : sweep.axes) {
        product *= static_cast<long>(axis.values.size());
        if (product > sweep.cap)
            throw ConfigError(source_name + ": sweep grid exceeds cap (" +
                              std::to_string(sweep.cap) + ")");
    }

    auto sections = detail::run_sections();
    sections.push_back("sweep");
    doc.reject_unused(sections);
    return sweep;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline RunConfig load_run_config(const std::string& path) {
    return parse_run_config(read_file(path), path);
}

inline SweepConfig load_sweep_config(const std::string& path) {
    return parse_sweep_config(read_file(path), path);
}

} // namespace gtop
