// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "iga/config.hpp"
#include "iga/output.hpp"
#include "iga/verify.hpp"

using namespace iga;
namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
    std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(clock_type::time_point t0) {
    return std::chrono::duration<double>(clock_type::now() - t0).count();
}

std::string slurp(const fs::path& p) {
    std::ifstream f{p, std::ios::binary};
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

run_config load_preset(const std::string& name) {
    const auto path = fs::path{IGA_SOURCE_DIR} / "presets" / name;
    return parse_config(parse_json_text(slurp(path), path.string()));
}

em_state random_state(const dims3& d, unsigned seed) {
    std::mt19937 rng{seed};
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto s = em_state::zero(d);
    for (int c = 0; c < 3; ++c) {
        for (auto& v : s.E[c].values()) v = u(rng);
        for (auto& v : s.H[c].values()) v = u(rng);
    }
    return s;
}

// Largest coefficient difference relative to the largest reference coefficient, per field.
double coefficient_error(const em_state& got, const em_state& ref) {
    double worst = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (const auto& [a, b] : {std::pair{&got.E[c], &ref.E[c]}, std::pair{&got.H[c], &ref.H[c]}}) {
            const double scale = std::max(b->max_abs(), 1e-300);
            for (std::size_t n = 0; n < a->size(); ++n) {
                worst = std::max(worst, std::abs(a->data()[n] - b->data()[n]) / scale);
            }
        }
    }
    return worst;
}

scheme_config paper_setup(double tau) {
    return make_scheme_config(uniform_spaces(16, 2, 1), tau, 1.0);
}

void oracle_equivalence() {
    const auto t0 = clock_type::now();
    double worst = 0.0;
    std::string cases;
    for (int ne : {4, 5}) {
        for (int p : {1, 2}) {
            for (auto mode : {boundary_mode::tangential_dirichlet, boundary_mode::natural}) {
                const auto cfg = make_scheme_config(uniform_spaces(ne, p, p - 1), 0.1, 0.1, scalar_material{}, mode);
                const auto ops = assemble_operators(cfg);
                for (const auto& s : {random_state(cfg.dims(), 100u + ne * 10 + p),
                                      project_manufactured(manufactured_solution::preset_a(), ops)}) {
                    worst = std::max(worst, coefficient_error(step(s, ops), dense_oracle_step(cfg, s)));
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    report("1 oracle equivalence", worst <= 1e-10 && secs < 10.0,
           fmt("4^3 and 5^3 elements, p=1,2, both boundary modes: max rel coefficient error %.3e (<= 1e-10), %.2f s",
               worst, secs));
}

void paper_error_bounds() {
    error_summary coarse{}, fine{};
    double coarse_s = 0.0, fine_s = 0.0;
    {
        const auto t0 = clock_type::now();
        coarse = run_manufactured(paper_setup(0.1), manufactured_solution::preset_a()).max_over_steps();
        coarse_s = seconds_since(t0);
    }
    {
        const auto t0 = clock_type::now();
        fine = run_manufactured(paper_setup(1.0 / 1280), manufactured_solution::preset_a()).max_over_steps();
        fine_s = seconds_since(t0);
    }
    report("2 L2 error bounds",
           coarse.l2_E < 0.08 && coarse.l2_H < 0.08 && fine.l2_E < 2e-4 && fine.l2_H < 2e-4,
           fmt("tau=1/10: E %.4e H %.4e (< 0.08, %.1f s); tau=1/1280: E %.4e H %.4e (< 2e-4, %.1f s)", coarse.l2_E,
               coarse.l2_H, coarse_s, fine.l2_E, fine.l2_H, fine_s));
    report("3 H-curl error bounds",
           coarse.hcurl_E < 0.35 && coarse.hcurl_H < 0.35 && fine.hcurl_E < 0.015 && fine.hcurl_H < 0.015,
           fmt("tau=1/10: E %.4e H %.4e (< 0.35); tau=1/1280: E %.4e H %.4e (< 0.015)", coarse.hcurl_E,
               coarse.hcurl_H, fine.hcurl_E, fine.hcurl_H));
}

void temporal_order() {
    const auto t0 = clock_type::now();
    const auto table = convergence_study(paper_setup(1.0 / 40), manufactured_solution::preset_a(),
                                         {1.0 / 40, 1.0 / 80, 1.0 / 160, 1.0 / 320});
    const double secs = seconds_since(t0);
    std::string errs;
    for (const auto& r : table.rows) {
        errs += fmt(" tau=%g E=%.3e H=%.3e;", r.tau, r.final.l2_E, r.final.l2_H);
    }
    const bool ok = std::abs(table.order_l2_E - 2.0) <= 0.3 && std::abs(table.order_l2_H - 2.0) <= 0.3 && secs < 300;
    report("4 temporal order", ok,
           fmt("slope E %.3f H %.3f (2 +- 0.3), %.1f s;", table.order_l2_E, table.order_l2_H, secs) + errs);
}

void normalization() {
    const auto ms = manufactured_solution::preset_a();
    const auto spaces = uniform_spaces(16, 2, 1);
    const double n = l2_norm(electric_at(ms, 0.0), spaces, 5);
    const error_evaluator against_zero{ms, spaces, 5};
    const auto r = against_zero(em_state::zero({18, 18, 18}));
    const double worst = std::max(std::abs(n * n - 1.0), std::abs(r.l2_E - 1.0));
    report("5 normalization", worst <= 1e-10,
           fmt("||u_A(.,0)||^2 = %.15f, error vs zero state %.15f (within 1e-10)", n * n, r.l2_E));
}

void linear_cost() {
    const auto cfg = load_preset("scaling.json");
    const auto rows = scaling_study(cfg.scaling_elements, cfg.mesh.degree, cfg.tau, cfg.scaling_steps,
                                    cfg.scaling_repeats, {}, cfg.scaling_min_seconds);
    bool ok = true;
    std::string detail;
    for (const auto& r : rows) {
        detail += fmt("%d^3: %.3e s/step", r.n_elements, r.seconds_per_step);
        if (!std::isnan(r.ratio)) {
            detail += fmt(" (ratio %.2f)", r.ratio);
            ok = ok && r.ratio >= 5.0 && r.ratio <= 12.0;
        }
        detail += "; ";
    }
    const auto phantom = load_preset("phantom-run.json");
    const int n = phantom.mesh.elements[0];
    auto material = [&](const std::array<knot_vector, 3>& spaces) { return build_material(phantom, spaces); };
    const auto constant = scaling_study({n}, phantom.mesh.degree, phantom.tau, cfg.scaling_steps,
                                        cfg.scaling_repeats, {}, cfg.scaling_min_seconds);
    const auto variable = scaling_study({n}, phantom.mesh.degree, phantom.tau, cfg.scaling_steps,
                                        cfg.scaling_repeats, material, cfg.scaling_min_seconds);
    const double ratio = variable[0].seconds_per_step / constant[0].seconds_per_step;
    detail += fmt("phantom %d^3 variable/constant %.2f (<= 3)", n, ratio);
    report("6 linear cost", ok && ratio <= 3.0, detail);
}

void variable_coefficients() {
    // uniform field against the scalar path
    const auto spaces = uniform_spaces(8, 2, 1);
    const double tau = 0.1;
    const auto scalar = assemble_operators(spaces, tau, scalar_material{});
    const auto field = assemble_operators(spaces, tau, coefficient_field::uniform(scalar.dims(), 1.0, 1.0));
    auto a = project_manufactured(manufactured_solution::preset_a(), scalar);
    auto b = a;
    double uniform_worst = 0.0;
    for (int k = 0; k < 10; ++k) {
        a = step(a, scalar);
        b = step(b, field);
        uniform_worst = std::max(uniform_worst, coefficient_error(b, a));
    }

    // two materials split at x = 0.5, sampled through the voxel pipeline
    const auto small = uniform_spaces(4, 2, 1);
    voxel_grid grid{{8, 8, 8}, 0};
    for (int i = 4; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            for (int k = 0; k < 8; ++k) grid(i, j, k) = 255;
    material_table table;
    table.values[2] = {4.0, 2.0};
    const auto coef = sample_coefficients(grid, small, table);
    double split_worst = 0.0;
    for (auto mode : {boundary_mode::tangential_dirichlet, boundary_mode::natural}) {
        const auto cfg = make_scheme_config(small, tau, tau, coef, mode);
        const auto ops = assemble_operators(cfg);
        const auto s = random_state(cfg.dims(), 7);
        split_worst = std::max(split_worst, coefficient_error(step(s, ops), dense_oracle_step(cfg, s)));
    }
    report("7 variable coefficients", uniform_worst <= 1e-12 && split_worst <= 1e-10,
           fmt("uniform field vs scalar, 10 steps: %.3e (<= 1e-12); half-space 4^3 vs dense oracle: %.3e (<= 1e-10)",
               uniform_worst, split_worst));
}

void property_suite() {
    const auto t0 = clock_type::now();
    const std::string cmd = std::string{IGA_PROPERTIES_PATH} + " --gtest_brief=1 > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    const bool ok = WIFEXITED(status) && WEXITSTATUS(status) == 0 && secs < 60.0;
    report("8 property suite", ok, fmt("standalone binary exit %d in %.2f s (< 60 s)",
                                       WIFEXITED(status) ? WEXITSTATUS(status) : -1, secs));
}

void phantom_run() {
    const auto out = fs::temp_directory_path() / "iga_acceptance_phantom";
    fs::remove_all(out);
    const auto preset = fs::path{IGA_SOURCE_DIR} / "presets" / "phantom-run.json";
    const auto log = out.string() + ".log";
    const std::string cmd = std::string{IGA_CLI_PATH} + " run --config " + preset.string()
                          + " --set output.directory=" + out.string() + " > " + log + " 2>&1";
    const auto t0 = clock_type::now();
    const int status = std::system(cmd.c_str());
    const double secs = seconds_since(t0);
    const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (code != 0) {
        report("phantom run", false, fmt("exit %d: ", code) + slurp(log));
        return;
    }
    const auto cfg = load_preset("phantom-run.json");
    const int res = cfg.output.snapshot_resolution;
    int snapshots = 0;
    bool well_formed = true;
    for (const auto& e : fs::directory_iterator{out}) {
        if (e.path().extension() != ".vtk") continue;
        ++snapshots;
        try {
            const auto v = parse_vtk(slurp(e.path()));
            well_formed = well_formed && v.arrays.size() == 6 && v.dims == std::array<int, 3>{res, res, res};
            for (const auto& a : v.arrays) {
                well_formed = well_formed && a.size() == static_cast<std::size_t>(res) * res * res;
                for (double x : a) well_formed = well_formed && std::isfinite(x);
            }
        } catch (const std::exception&) {
            well_formed = false;
        }
    }
    // norms.csv: step,t,norm_E,norm_H
    std::istringstream norms{slurp(out / "norms.csv")};
    std::string line;
    std::getline(norms, line);
    double first = -1.0, peak = 0.0;
    int rows = 0;
    while (std::getline(norms, line)) {
        double e = 0.0, h = 0.0;
        if (std::sscanf(line.c_str(), "%*d,%*[^,],%lf,%lf", &e, &h) != 2) {
            well_formed = false;
            break;
        }
        const double total = std::sqrt(e * e + h * h);
        if (first < 0.0) first = total;
        peak = std::max(peak, total);
        ++rows;
    }
    const int expected_snapshots = cfg.n_steps / cfg.output.snapshot_every + (cfg.n_steps % cfg.output.snapshot_every ? 2 : 1);
    const bool bounded = first > 0.0 && peak <= 10.0 * first;
    report("phantom run", well_formed && bounded && rows == cfg.n_steps + 1 && snapshots == expected_snapshots,
           fmt("32^3 p=2 over [0,1]: %d steps, peak/initial norm %.3f (<= 10), %d well-formed snapshots, %.1f s",
               rows - 1, peak / first, snapshots, secs));
}

} // namespace

int main() {
    const auto t0 = clock_type::now();
    auto guarded = [](const char* id, auto fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, false, std::string{"exception: "} + e.what());
        }
    };
    guarded("1 oracle equivalence", oracle_equivalence);
    guarded("5 normalization", normalization);
    guarded("7 variable coefficients", variable_coefficients);
    guarded("8 property suite", property_suite);
    guarded("6 linear cost", linear_cost);
    guarded("2/3 error bounds", paper_error_bounds);
    guarded("4 temporal order", temporal_order);
    guarded("phantom run", phantom_run);
    std::printf("%s: %d failure(s), %.1f s\n", failures == 0 ? "ALL PASS" : "FAILED", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
