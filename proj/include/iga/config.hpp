#ifndef IGA_CONFIG_HPP
#define IGA_CONFIG_HPP

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "iga/errors.hpp"
#include "iga/materials.hpp"
#include "iga/maxwell.hpp"
#include "iga/verify.hpp"

namespace iga {

using json = nlohmann::json;

/// Problem in the configuration document. `key` is the dotted path of the
/// offending entry, empty for syntax errors.
class config_error : public parameter_error {
public:
    config_error(const std::string& key, const std::string& what)
    : parameter_error{key.empty() ? what : key + ": " + what}, key_{key} { }
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

enum class run_mode { run, verify, convergence, scaling };

inline run_mode parse_mode(const std::string& s) {
    if (s == "run") return run_mode::run;
    if (s == "verify") return run_mode::verify;
    if (s == "convergence") return run_mode::convergence;
    if (s == "scaling") return run_mode::scaling;
    throw config_error{"mode", "unknown mode '" + s + "'"};
}

inline const char* to_string(run_mode m) {
    switch (m) {
    case run_mode::run: return "run";
    case run_mode::verify: return "verify";
    case run_mode::convergence: return "convergence";
    case run_mode::scaling: return "scaling";
    }
    return "?";
}

struct mesh_config {
    std::array<int, 3> elements{16, 16, 16};
    int degree = 2;
    int continuity = 1;
};

struct voxel_source {
    std::string path;
    dims3 dims{0, 0, 0};
    voxel_order order = voxel_order::x_fastest;
};

struct pgm_source {
    std::string pattern;
    int slices = 0;
    int first_index = 0;
};

struct material_config {
    std::optional<scalar_material> scalar;
    std::optional<phantom_spec> phantom;
    std::optional<voxel_source> voxels;
    std::optional<pgm_source> pgm;
    material_table table;
};

struct output_config {
    std::string directory = "out";
    int snapshot_every = 0; // steps between snapshots, 0 for none
    int snapshot_resolution = 32;
    bool error_csv = true;
    bool dump_coefficients = false;
};

struct verify_bounds {
    double max_l2 = 0.08;
    double max_hcurl = 0.35;
    bool use_max_over_steps = true;
};

struct run_config {
    run_mode mode = run_mode::verify;
    mesh_config mesh;
    double tau = 0.1;
    int n_steps = 10;
    double final_time = 1.0;
    boundary_mode boundary = boundary_mode::tangential_dirichlet;
    material_config materials;
    std::optional<manufactured_solution> manufactured; // empty: zero initial data
    output_config output;
    verify_bounds bounds;
    std::vector<double> convergence_taus{1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320};
    std::vector<int> scaling_elements{8, 16, 32};
    int scaling_steps = 3;
    int scaling_repeats = 3;
    double scaling_min_seconds = 0.2;

    std::array<knot_vector, 3> spaces() const {
        return {make_open_knot_vector(mesh.elements[0], mesh.degree, mesh.continuity),
                make_open_knot_vector(mesh.elements[1], mesh.degree, mesh.continuity),
                make_open_knot_vector(mesh.elements[2], mesh.degree, mesh.continuity)};
    }
};

namespace detail {

/// Reads typed entries from one JSON object and rejects leftovers.
class object_reader {
public:
    object_reader(const json& j, std::string path) : j_{j}, path_{std::move(path)} {
        if (!j_.is_object()) {
            throw config_error{path_.empty() ? "<root>" : path_, "expected an object"};
        }
    }

    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

    bool has(const std::string& k) const { return j_.contains(k); }

    const json& raw(const std::string& k) {
        used_.insert(k);
        return j_.at(k);
    }

    template <typename T>
    T get(const std::string& k) {
        try {
            return raw(k).get<T>();
        } catch (const json::exception& e) {
            throw config_error{key(k), std::string{"wrong type ("} + e.what() + ")"};
        }
    }

    template <typename T>
    void optional(const std::string& k, T& out) {
        if (has(k)) {
            out = get<T>(k);
        }
    }

    object_reader child(const std::string& k) {
        return object_reader{raw(k), key(k)};
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!used_.count(it.key())) {
                throw config_error{key(it.key()), "unknown key"};
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> used_;
};

inline double positive(double v, const std::string& key) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw config_error{key, "must be positive"};
    }
    return v;
}

inline material_values read_material_values(object_reader r) {
    material_values v;
    r.optional("epsilon", v.epsilon);
    r.optional("mu", v.mu);
    positive(v.epsilon, r.key("epsilon"));
    positive(v.mu, r.key("mu"));
    r.finish();
    return v;
}

inline manufactured_solution read_manufactured(object_reader r) {
    manufactured_solution ms;
    if (r.has("preset") == r.has("modes")) {
        throw config_error{r.key("preset"), "give exactly one of preset and modes"};
    }
    if (r.has("preset")) {
        const auto p = r.get<std::string>("preset");
        if (p != "A") {
            throw config_error{r.key("preset"), "unknown preset '" + p + "'"};
        }
        ms = manufactured_solution::preset_a();
    } else {
        const auto& modes = r.raw("modes");
        if (!modes.is_array() || modes.empty()) {
            throw config_error{r.key("modes"), "expected a nonempty array"};
        }
        for (std::size_t i = 0; i < modes.size(); ++i) {
            object_reader m{modes[i], r.key("modes") + "." + std::to_string(i)};
            manufactured_mode mode;
            mode.family = m.get<int>("family");
            m.optional("kappa", mode.kappa);
            m.optional("lambda", mode.lambda);
            m.optional("weight", mode.weight);
            m.finish();
            if (mode.family < 1 || mode.family > 3) {
                throw config_error{m.key("family"), "must be 1, 2 or 3"};
            }
            if (mode.kappa == 0 || mode.lambda == 0) {
                throw config_error{m.key("kappa"), "wave numbers must be nonzero"};
            }
            ms.modes.push_back(mode);
        }
    }
    r.finish();
    return ms;
}

} // namespace detail

/// Validated configuration from a JSON document.
inline run_config parse_config(const json& doc, std::optional<run_mode> mode = std::nullopt) {
    using detail::object_reader;
    run_config cfg;
    object_reader root{doc, ""};

    if (root.has("mode")) {
        cfg.mode = parse_mode(root.get<std::string>("mode"));
        if (mode && *mode != cfg.mode) {
            throw config_error{"mode", "config says '" + std::string{to_string(cfg.mode)} + "' but '"
                                           + to_string(*mode) + "' was requested"};
        }
    } else if (mode) {
        cfg.mode = *mode;
    }

    if (root.has("mesh")) {
        auto m = root.child("mesh");
        if (m.has("elements")) {
            const auto& e = m.raw("elements");
            if (e.is_number_integer()) {
                const int n = e.get<int>();
                cfg.mesh.elements = {n, n, n};
            } else if (e.is_array() && e.size() == 3) {
                cfg.mesh.elements = e.get<std::array<int, 3>>();
            } else {
                throw config_error{m.key("elements"), "expected an integer or three integers"};
            }
        }
        m.optional("degree", cfg.mesh.degree);
        m.optional("continuity", cfg.mesh.continuity);
        m.finish();
        for (int n : cfg.mesh.elements) {
            if (n < 1) {
                throw config_error{"mesh.elements", "must be positive"};
            }
        }
        if (cfg.mesh.degree < 1) {
            throw config_error{"mesh.degree", "must be at least 1"};
        }
        if (cfg.mesh.continuity < 0 || cfg.mesh.continuity > cfg.mesh.degree - 1) {
            throw config_error{"mesh.continuity", "must lie in [0, degree - 1]"};
        }
    }

    if (root.has("time")) {
        auto t = root.child("time");
        std::optional<double> tau, final_time;
        std::optional<int> steps;
        if (t.has("tau")) tau = detail::positive(t.get<double>("tau"), "time.tau");
        if (t.has("n_steps")) steps = t.get<int>("n_steps");
        if (t.has("final_time")) final_time = detail::positive(t.get<double>("final_time"), "time.final_time");
        t.finish();
        if (steps && *steps < 1) {
            throw config_error{"time.n_steps", "must be positive"};
        }
        const double T = final_time.value_or(1.0);
        if (tau && steps) {
            if (std::abs(*tau * *steps - T) > 1e-12 * std::max(1.0, T)) {
                throw config_error{"time", "tau * n_steps does not equal final_time"};
            }
        } else if (tau) {
            const double n = T / *tau;
            if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) {
                throw config_error{"time.tau", "does not divide final_time"};
            }
            steps = static_cast<int>(std::lround(n));
        } else if (steps) {
            tau = T / *steps;
        } else {
            tau = cfg.tau;
            steps = static_cast<int>(std::lround(T / *tau));
        }
        cfg.tau = *tau;
        cfg.n_steps = *steps;
        cfg.final_time = T;
    }

    if (root.has("boundary")) {
        const auto b = root.get<std::string>("boundary");
        if (b == "natural") {
            cfg.boundary = boundary_mode::natural;
        } else if (b == "tangential_dirichlet") {
            cfg.boundary = boundary_mode::tangential_dirichlet;
        } else {
            throw config_error{"boundary", "expected 'natural' or 'tangential_dirichlet'"};
        }
    }

    if (root.has("materials")) {
        auto m = root.child("materials");
        int sources = 0;
        if (m.has("scalar")) {
            ++sources;
            const auto v = detail::read_material_values(m.child("scalar"));
            cfg.materials.scalar = scalar_material{v.epsilon, v.mu};
        }
        if (m.has("phantom")) {
            ++sources;
            auto p = m.child("phantom");
            phantom_spec spec;
            p.optional("outer_radius", spec.outer_radius);
            p.optional("skull_thickness", spec.skull_thickness);
            if (p.has("center")) spec.center = p.get<std::array<double, 3>>("center");
            if (p.has("voxels")) spec.voxels = p.get<std::array<int, 3>>("voxels");
            p.finish();
            cfg.materials.phantom = spec;
        }
        if (m.has("voxel_file")) {
            ++sources;
            auto v = m.child("voxel_file");
            voxel_source src;
            src.path = v.get<std::string>("path");
            src.dims = v.get<std::array<int, 3>>("dims");
            if (v.has("order")) {
                const auto o = v.get<std::string>("order");
                if (o == "x_fastest") {
                    src.order = voxel_order::x_fastest;
                } else if (o == "z_fastest") {
                    src.order = voxel_order::z_fastest;
                } else {
                    throw config_error{v.key("order"), "expected 'x_fastest' or 'z_fastest'"};
                }
            }
            v.finish();
            for (int d : src.dims) {
                if (d < 1) {
                    throw config_error{"materials.voxel_file.dims", "must be positive"};
                }
            }
            cfg.materials.voxels = src;
        }
        if (m.has("pgm_stack")) {
            ++sources;
            auto v = m.child("pgm_stack");
            pgm_source src;
            src.pattern = v.get<std::string>("pattern");
            src.slices = v.get<int>("slices");
            v.optional("first_index", src.first_index);
            v.finish();
            if (src.slices < 1) {
                throw config_error{"materials.pgm_stack.slices", "must be positive"};
            }
            cfg.materials.pgm = src;
        }
        if (sources > 1) {
            throw config_error{"materials", "give exactly one of scalar, phantom, voxel_file, pgm_stack"};
        }
        if (m.has("table")) {
            auto t = m.child("table");
            const char* names[3] = {"air", "tissue", "skull"};
            for (int c = 0; c < 3; ++c) {
                if (t.has(names[c])) {
                    cfg.materials.table.values[c] = detail::read_material_values(t.child(names[c]));
                }
            }
            t.optional("air_threshold", cfg.materials.table.air_threshold);
            t.optional("skull_threshold", cfg.materials.table.skull_threshold);
            t.finish();
            try {
                cfg.materials.table.validate();
            } catch (const parameter_error& e) {
                throw config_error{"materials.table", e.what()};
            }
        }
        m.finish();
    }
    if (!cfg.materials.scalar && !cfg.materials.phantom && !cfg.materials.voxels && !cfg.materials.pgm) {
        cfg.materials.scalar = scalar_material{};
    }

    if (root.has("initial")) {
        auto in = root.child("initial");
        const bool has_ms = in.has("manufactured");
        const bool has_zero = in.has("zero");
        if (has_ms == has_zero) {
            throw config_error{"initial", "give exactly one of manufactured and zero"};
        }
        if (has_ms) {
            cfg.manufactured = detail::read_manufactured(in.child("manufactured"));
        } else if (!in.get<bool>("zero")) {
            throw config_error{"initial.zero", "must be true when given"};
        }
        in.finish();
    } else {
        cfg.manufactured = manufactured_solution::preset_a();
    }

    if (root.has("output")) {
        auto o = root.child("output");
        o.optional("directory", cfg.output.directory);
        o.optional("snapshot_every", cfg.output.snapshot_every);
        o.optional("snapshot_resolution", cfg.output.snapshot_resolution);
        o.optional("error_csv", cfg.output.error_csv);
        o.optional("dump_coefficients", cfg.output.dump_coefficients);
        o.finish();
        if (cfg.output.snapshot_every < 0) {
            throw config_error{"output.snapshot_every", "must be nonnegative"};
        }
        if (cfg.output.snapshot_resolution < 2) {
            throw config_error{"output.snapshot_resolution", "must be at least 2"};
        }
    }

    if (root.has("verify")) {
        auto v = root.child("verify");
        if (v.has("max_l2")) cfg.bounds.max_l2 = detail::positive(v.get<double>("max_l2"), "verify.max_l2");
        if (v.has("max_hcurl")) cfg.bounds.max_hcurl = detail::positive(v.get<double>("max_hcurl"), "verify.max_hcurl");
        if (v.has("statistic")) {
            const auto s = v.get<std::string>("statistic");
            if (s != "max" && s != "final") {
                throw config_error{"verify.statistic", "expected 'max' or 'final'"};
            }
            cfg.bounds.use_max_over_steps = s == "max";
        }
        v.finish();
    }

    if (root.has("convergence")) {
        auto c = root.child("convergence");
        c.optional("taus", cfg.convergence_taus);
        c.finish();
        if (cfg.convergence_taus.empty()) {
            throw config_error{"convergence.taus", "must not be empty"};
        }
        for (std::size_t i = 0; i < cfg.convergence_taus.size(); ++i) {
            detail::positive(cfg.convergence_taus[i], "convergence.taus");
            if (i > 0 && !(cfg.convergence_taus[i] < cfg.convergence_taus[i - 1])) {
                throw config_error{"convergence.taus", "must be strictly descending"};
            }
        }
    }

    if (root.has("scaling")) {
        auto s = root.child("scaling");
        s.optional("elements", cfg.scaling_elements);
        s.optional("steps", cfg.scaling_steps);
        s.optional("repeats", cfg.scaling_repeats);
        s.optional("min_batch_seconds", cfg.scaling_min_seconds);
        s.finish();
        if (cfg.scaling_elements.empty()) {
            throw config_error{"scaling.elements", "must not be empty"};
        }
        for (std::size_t i = 0; i < cfg.scaling_elements.size(); ++i) {
            if (cfg.scaling_elements[i] < 1 || (i > 0 && cfg.scaling_elements[i] <= cfg.scaling_elements[i - 1])) {
                throw config_error{"scaling.elements", "must be positive and ascending"};
            }
        }
        if (cfg.scaling_steps < 1 || cfg.scaling_repeats < 1) {
            throw config_error{"scaling", "steps and repeats must be positive"};
        }
    }
    root.finish();

    if (cfg.mode == run_mode::verify || cfg.mode == run_mode::convergence) {
        if (!cfg.manufactured) {
            throw config_error{"initial", std::string{to_string(cfg.mode)} + " needs manufactured initial data"};
        }
        const auto& s = cfg.materials.scalar;
        if (!s || s->epsilon != 1.0 || s->mu != 1.0) {
            throw config_error{"materials", std::string{to_string(cfg.mode)} + " needs scalar epsilon = mu = 1"};
        }
    }
    return cfg;
}

inline json parse_json_text(const std::string& text, const std::string& name) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error{"", name + ": " + e.what()};
    }
}

/// Applies `key=value` with a dotted key; the value is read as JSON when it
/// parses, otherwise as a string.
inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw config_error{"", "override '" + assignment + "' is not key=value"};
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    std::size_t pos = 0;
    while (true) {
        const auto dot = key.find('.', pos);
        const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (part.empty()) {
            throw config_error{key, "empty path segment"};
        }
        if (node->is_null()) {
            *node = json::object();
        }
        json* next = nullptr;
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(part);
            } catch (...) {
                throw config_error{key, "array index expected at '" + part + "'"};
            }
            if (idx >= node->size()) {
                throw config_error{key, "array index out of range"};
            }
            next = &(*node)[idx];
        } else if (node->is_object()) {
            next = &(*node)[part];
        } else {
            throw config_error{key, "cannot descend into a scalar"};
        }
        if (dot == std::string::npos) {
            *next = value;
            return;
        }
        node = next;
        pos = dot + 1;
    }
}

/// The configuration with every default filled in, as JSON.
inline json resolved_json(const run_config& c) {
    json j;
    j["mode"] = to_string(c.mode);
    j["mesh"] = {{"elements", c.mesh.elements}, {"degree", c.mesh.degree}, {"continuity", c.mesh.continuity}};
    j["time"] = {{"tau", c.tau}, {"n_steps", c.n_steps}, {"final_time", c.final_time}};
    j["boundary"] = c.boundary == boundary_mode::natural ? "natural" : "tangential_dirichlet";
    json m = json::object();
    if (c.materials.scalar) {
        m["scalar"] = {{"epsilon", c.materials.scalar->epsilon}, {"mu", c.materials.scalar->mu}};
    }
    if (c.materials.phantom) {
        const auto& p = *c.materials.phantom;
        m["phantom"] = {{"outer_radius", p.outer_radius},
                        {"skull_thickness", p.skull_thickness},
                        {"center", p.center},
                        {"voxels", p.voxels}};
    }
    if (c.materials.voxels) {
        const auto& v = *c.materials.voxels;
        m["voxel_file"] = {{"path", v.path},
                           {"dims", v.dims},
                           {"order", v.order == voxel_order::x_fastest ? "x_fastest" : "z_fastest"}};
    }
    if (c.materials.pgm) {
        const auto& v = *c.materials.pgm;
        m["pgm_stack"] = {{"pattern", v.pattern}, {"slices", v.slices}, {"first_index", v.first_index}};
    }
    json t = json::object();
    const char* names[3] = {"air", "tissue", "skull"};
    for (int k = 0; k < 3; ++k) {
        t[names[k]] = {{"epsilon", c.materials.table.values[k].epsilon}, {"mu", c.materials.table.values[k].mu}};
    }
    t["air_threshold"] = c.materials.table.air_threshold;
    t["skull_threshold"] = c.materials.table.skull_threshold;
    m["table"] = t;
    j["materials"] = m;
    if (c.manufactured) {
        json modes = json::array();
        for (const auto& md : c.manufactured->modes) {
            modes.push_back({{"family", md.family}, {"kappa", md.kappa}, {"lambda", md.lambda}, {"weight", md.weight}});
        }
        j["initial"] = {{"manufactured", {{"modes", modes}}}};
    } else {
        j["initial"] = {{"zero", true}};
    }
    j["output"] = {{"directory", c.output.directory},
                   {"snapshot_every", c.output.snapshot_every},
                   {"snapshot_resolution", c.output.snapshot_resolution},
                   {"error_csv", c.output.error_csv},
                   {"dump_coefficients", c.output.dump_coefficients}};
    j["verify"] = {{"max_l2", c.bounds.max_l2},
                   {"max_hcurl", c.bounds.max_hcurl},
                   {"statistic", c.bounds.use_max_over_steps ? "max" : "final"}};
    j["convergence"] = {{"taus", c.convergence_taus}};
    j["scaling"] = {{"elements", c.scaling_elements},
                    {"steps", c.scaling_steps},
                    {"repeats", c.scaling_repeats},
                    {"min_batch_seconds", c.scaling_min_seconds}};
    return j;
}

/// Loads the voxel data named by the configuration (phantom, raw file or
/// PGM stack) and samples one material per test function.
inline material_data build_material(const run_config& c, const std::array<knot_vector, 3>& spaces) {
    if (c.materials.scalar) {
        return *c.materials.scalar;
    }
    voxel_grid grid;
    if (c.materials.phantom) {
        grid = synthetic_phantom(*c.materials.phantom);
    } else if (c.materials.voxels) {
        grid = load_voxel_file(c.materials.voxels->path, c.materials.voxels->dims, c.materials.voxels->order);
    } else {
        grid = load_pgm_stack(c.materials.pgm->pattern, c.materials.pgm->slices, c.materials.pgm->first_index);
    }
    return sample_coefficients(grid, spaces, c.materials.table);
}

inline scheme_config build_scheme(const run_config& c) {
    scheme_config s;
    s.spaces = c.spaces();
    s.tau = c.tau;
    s.final_time = c.final_time;
    s.n_steps = c.n_steps;
    s.boundary = c.boundary;
    s.material = build_material(c, s.spaces);
    s.validate();
    return s;
}

} // namespace iga

#endif // IGA_CONFIG_HPP
