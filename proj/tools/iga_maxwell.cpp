// Command line driver: verify, run, convergence and scaling modes.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iga/config.hpp"
#include "iga/output.hpp"
#include "iga/verify.hpp"

namespace fs = std::filesystem;
using namespace iga;

namespace {

enum exit_code { ok = 0, config_failure = 1, numerical_failure = 2, io_failure = 3 };

struct failure {
    exit_code code;
    std::string reason;
};

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') {
            out += '\\';
        }
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

std::string read_text(const std::string& path) {
    std::ifstream f{path, std::ios::binary};
    if (!f) {
        throw io_error{"cannot open " + path};
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path prepare_output(const run_config& cfg) {
    const fs::path dir{cfg.output.directory};
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw io_error{"cannot create output directory " + dir.string() + ": " + ec.message()};
    }
    write_text((dir / "resolved_config.json").string(), resolved_json(cfg).dump(2) + "\n");
    return dir;
}

std::string snapshot_name(int step) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshot_%06d.vtk", step);
    return buf;
}

void dump_coefficients(const em_state& s, const fs::path& path) {
    std::string out;
    const auto d = s.E[0].dims();
    out += "# dims " + std::to_string(d[0]) + " " + std::to_string(d[1]) + " " + std::to_string(d[2]) + " t "
         + format_double(s.t) + "\n";
    const char* names[6] = {"E1", "E2", "E3", "H1", "H2", "H3"};
    for (int f = 0; f < 6; ++f) {
        const auto& t = f < 3 ? s.E[f] : s.H[f - 3];
        out += std::string{names[f]} + "\n";
        for (double v : t.values()) {
            out += format_double(v) + "\n";
        }
    }
    write_text(path.string(), out);
}

bool manufactured_comparable(const run_config& cfg) {
    return cfg.manufactured && cfg.materials.scalar && cfg.materials.scalar->epsilon == 1.0
        && cfg.materials.scalar->mu == 1.0;
}

void check_finite(const em_state& s, int step) {
    if (!s.all_finite()) {
        throw singular_error{"non-finite field values after step " + std::to_string(step), -1};
    }
}

int run_verify(const run_config& cfg) {
    const auto scheme = build_scheme(cfg);
    const auto dir = prepare_output(cfg);
    const auto report = run_manufactured(scheme, *cfg.manufactured, [&](const em_state& s, const error_norms& row) {
        if (cfg.output.snapshot_every > 0 && (row.step % cfg.output.snapshot_every == 0 || row.step == scheme.n_steps)) {
            write_snapshot(s, scheme.spaces, cfg.output.snapshot_resolution, (dir / snapshot_name(row.step)).string());
        }
    });
    if (cfg.output.error_csv) {
        write_error_csv(report, (dir / "errors.csv").string());
    }
    const auto mx = report.max_over_steps();
    const auto fin = report.at_final();
    std::printf("max_over_steps l2_E=%.6e l2_H=%.6e hcurl_E=%.6e hcurl_H=%.6e\n", mx.l2_E, mx.l2_H, mx.hcurl_E,
                mx.hcurl_H);
    std::printf("at_final       l2_E=%.6e l2_H=%.6e hcurl_E=%.6e hcurl_H=%.6e\n", fin.l2_E, fin.l2_H, fin.hcurl_E,
                fin.hcurl_H);
    const auto& s = cfg.bounds.use_max_over_steps ? mx : fin;
    const bool pass = s.l2_E < cfg.bounds.max_l2 && s.l2_H < cfg.bounds.max_l2 && s.hcurl_E < cfg.bounds.max_hcurl
                   && s.hcurl_H < cfg.bounds.max_hcurl;
    std::printf("verify %s (bounds l2 < %g, hcurl < %g, statistic %s)\n", pass ? "PASS" : "FAIL", cfg.bounds.max_l2,
                cfg.bounds.max_hcurl, cfg.bounds.use_max_over_steps ? "max" : "final");
    if (!pass) {
        throw failure{numerical_failure, "verify bounds exceeded"};
    }
    return ok;
}

int run_simulation(const run_config& cfg) {
    const auto scheme = build_scheme(cfg);
    const auto dir = prepare_output(cfg);
    const auto ops = assemble_operators(scheme);
    em_state s = cfg.manufactured ? project_manufactured(*cfg.manufactured, ops) : em_state::zero(ops.dims());

    const auto quad = make_quadrature_grid(scheme.spaces, scheme.spaces[0].degree() + 1);
    auto field_norm = [&](const field3& f) {
        double sum = 0.0;
        for (int c = 0; c < 3; ++c) {
            const auto v = evaluate_on_grid(f[c], quad);
            const auto d = v.dims();
            for (int i = 0; i < d[0]; ++i) {
                for (int j = 0; j < d[1]; ++j) {
                    for (int k = 0; k < d[2]; ++k) {
                        sum += quad.weights[0][i] * quad.weights[1][j] * quad.weights[2][k] * v(i, j, k) * v(i, j, k);
                    }
                }
            }
        }
        return std::sqrt(sum);
    };

    const bool with_errors = cfg.output.error_csv && manufactured_comparable(cfg);
    std::optional<error_evaluator> errors;
    if (with_errors) {
        errors.emplace(*cfg.manufactured, scheme.spaces, scheme.spaces[0].degree() + 2);
    }
    error_report report;
    std::string norms = "step,t,norm_E,norm_H\n";
    double initial = 0.0;
    double peak = 0.0;
    for (int n = 0;; ++n) {
        check_finite(s, n);
        const double ne = field_norm(s.E);
        const double nh = field_norm(s.H);
        norms += std::to_string(n) + "," + format_double(s.t) + "," + format_double(ne) + "," + format_double(nh) + "\n";
        const double total = std::sqrt(ne * ne + nh * nh);
        if (n == 0) {
            initial = total;
        }
        peak = std::max(peak, total);
        if (initial > 0.0 && total > 1e3 * initial) {
            throw failure{numerical_failure, "field norm grew by more than 1e3 at step " + std::to_string(n)};
        }
        if (errors) {
            auto row = (*errors)(s);
            row.step = n;
            report.rows.push_back(row);
        }
        if (cfg.output.snapshot_every > 0 && (n % cfg.output.snapshot_every == 0 || n == scheme.n_steps)) {
            write_snapshot(s, scheme.spaces, cfg.output.snapshot_resolution, (dir / snapshot_name(n)).string());
        }
        if (n == scheme.n_steps) {
            break;
        }
        s = step(s, ops);
        s.t = (n + 1) * scheme.tau;
    }
    write_text((dir / "norms.csv").string(), norms);
    if (errors) {
        write_error_csv(report, (dir / "errors.csv").string());
    }
    if (cfg.output.dump_coefficients) {
        dump_coefficients(s, dir / "coefficients.txt");
    }
    std::printf("run completed steps=%d t=%.6g initial_norm=%.6e peak_norm=%.6e final_norm=%.6e\n", scheme.n_steps,
                s.t, initial, peak, std::sqrt(std::pow(field_norm(s.E), 2) + std::pow(field_norm(s.H), 2)));
    if (ops.variable_material()) {
        std::size_t groups = 0;
        for (const auto& sub : ops.e_plans) {
            for (const auto& comp : sub) {
                for (const auto& p : comp) {
                    groups += p.is_variable() ? p.groups().size() : 0;
                }
            }
        }
        std::printf("variable material: %zu fiber groups across sweep plans\n", groups);
    }
    return ok;
}

int run_convergence(const run_config& cfg) {
    const auto scheme = build_scheme(cfg);
    const auto dir = prepare_output(cfg);
    const auto table = convergence_study(scheme, *cfg.manufactured, cfg.convergence_taus);
    std::string csv = "tau,n_steps,l2_E,l2_H,hcurl_E,hcurl_H,max_l2_E,max_l2_H,max_hcurl_E,max_hcurl_H\n";
    for (const auto& r : table.rows) {
        csv += format_double(r.tau) + "," + std::to_string(r.n_steps) + "," + format_double(r.final.l2_E) + ","
             + format_double(r.final.l2_H) + "," + format_double(r.final.hcurl_E) + "," + format_double(r.final.hcurl_H)
             + "," + format_double(r.max.l2_E) + "," + format_double(r.max.l2_H) + "," + format_double(r.max.hcurl_E)
             + "," + format_double(r.max.hcurl_H) + "\n";
        std::printf("tau=%-12.6g l2_E=%.4e l2_H=%.4e hcurl_E=%.4e hcurl_H=%.4e\n", r.tau, r.final.l2_E, r.final.l2_H,
                    r.final.hcurl_E, r.final.hcurl_H);
    }
    write_text((dir / "convergence.csv").string(), csv);
    if (table.rows.size() >= 2) {
        std::printf("order l2_E=%.3f l2_H=%.3f hcurl_E=%.3f hcurl_H=%.3f\n", table.order_l2_E, table.order_l2_H,
                    table.order_hcurl_E, table.order_hcurl_H);
    }
    return ok;
}

int run_scaling(const run_config& cfg) {
    const auto dir = prepare_output(cfg);
    std::function<material_data(const std::array<knot_vector, 3>&)> material;
    if (!cfg.materials.scalar || cfg.materials.scalar->epsilon != 1.0 || cfg.materials.scalar->mu != 1.0) {
        material = [&cfg](const std::array<knot_vector, 3>& spaces) { return build_material(cfg, spaces); };
    }
    const auto rows = scaling_study(cfg.scaling_elements, cfg.mesh.degree, cfg.tau, cfg.scaling_steps,
                                    cfg.scaling_repeats, material, cfg.scaling_min_seconds);
    std::string csv = "n_elements,unknowns,seconds_per_step,ratio\n";
    for (const auto& r : rows) {
        csv += std::to_string(r.n_elements) + "," + std::to_string(r.unknowns) + "," + format_double(r.seconds_per_step)
             + "," + (std::isnan(r.ratio) ? std::string{} : format_double(r.ratio)) + "\n";
        std::printf("elements=%d unknowns=%ld seconds_per_step=%.6e ratio=%s\n", r.n_elements, r.unknowns,
                    r.seconds_per_step, std::isnan(r.ratio) ? "-" : format_double(r.ratio).c_str());
    }
    write_text((dir / "scaling.csv").string(), csv);
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Alternating-direction isogeometric Maxwell solver"};
    std::string mode_name;
    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("mode", mode_name, "run | verify | convergence | scaling")->required();
    app.add_option("--config,-c", config_path, "JSON configuration file")->required();
    app.add_option("--set,-s", overrides, "override a config entry, key=value with a dotted key");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "FAIL kind=config code=1 reason=%s\n", quoted(e.what()).c_str());
        return config_failure;
    }

    auto fail = [](exit_code code, const std::string& reason) {
        const char* kind = code == config_failure ? "config" : code == numerical_failure ? "numerical" : "io";
        std::fprintf(stderr, "FAIL kind=%s code=%d reason=%s\n", kind, static_cast<int>(code), quoted(reason).c_str());
        return static_cast<int>(code);
    };

    run_config cfg;
    try {
        const auto mode = parse_mode(mode_name);
        json doc = parse_json_text(read_text(config_path), config_path);
        for (const auto& o : overrides) {
            apply_override(doc, o);
        }
        cfg = parse_config(doc, mode);
    } catch (const io_error& e) {
        return fail(io_failure, e.what());
    } catch (const std::exception& e) {
        return fail(config_failure, e.what());
    }

    try {
        switch (cfg.mode) {
        case run_mode::verify: return run_verify(cfg);
        case run_mode::run: return run_simulation(cfg);
        case run_mode::convergence: return run_convergence(cfg);
        case run_mode::scaling: return run_scaling(cfg);
        }
    } catch (const failure& f) {
        return fail(f.code, f.reason);
    } catch (const io_error& e) {
        return fail(io_failure, e.what());
    } catch (const format_error& e) {
        return fail(io_failure, e.what());
    } catch (const parameter_error& e) {
        return fail(config_failure, e.what());
    } catch (const size_guard_error& e) {
        return fail(config_failure, e.what());
    } catch (const std::exception& e) {
        return fail(numerical_failure, e.what());
    }
    return ok;
}
