#ifndef IGA_OUTPUT_HPP
#define IGA_OUTPUT_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "iga/errors.hpp"
#include "iga/evaluate.hpp"
#include "iga/maxwell.hpp"
#include "iga/verify.hpp"

namespace iga {

/// Six point-sampled fields on a uniform grid over the closed domain.
struct field_snapshot {
    int resolution = 0;
    double t = 0.0;
    vec3 origin{0.0, 0.0, 0.0};
    vec3 spacing{1.0, 1.0, 1.0};
    std::array<tensor3, 6> values; // E1 E2 E3 H1 H2 H3 at grid points

    static constexpr std::array<const char*, 6> names{"E1", "E2", "E3", "H1", "H2", "H3"};
};

inline field_snapshot sample_state(const em_state& s, const std::array<knot_vector, 3>& spaces, int resolution) {
    if (resolution < 2) {
        throw parameter_error{"snapshot resolution must be at least 2"};
    }
    const auto grid = make_sampling_grid(spaces, resolution);
    field_snapshot snap;
    snap.resolution = resolution;
    snap.t = s.t;
    for (int a = 0; a < 3; ++a) {
        snap.origin[a] = spaces[a].lower();
        snap.spacing[a] = (spaces[a].upper() - spaces[a].lower()) / (resolution - 1);
    }
    for (int c = 0; c < 3; ++c) {
        snap.values[c] = evaluate_on_grid(s.E[c], grid);
        snap.values[3 + c] = evaluate_on_grid(s.H[c], grid);
    }
    return snap;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Legacy VTK structured points, ASCII, x varying fastest.
inline std::string encode_vtk(const field_snapshot& snap) {
    const int n = snap.resolution;
    std::ostringstream out;
    out << "# vtk DataFile Version 3.0\n";
    out << "fields t=" << format_double(snap.t) << "\n";
    out << "ASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << n << ' ' << n << ' ' << n << "\n";
    out << "ORIGIN " << format_double(snap.origin[0]) << ' ' << format_double(snap.origin[1]) << ' '
        << format_double(snap.origin[2]) << "\n";
    out << "SPACING " << format_double(snap.spacing[0]) << ' ' << format_double(snap.spacing[1]) << ' '
        << format_double(snap.spacing[2]) << "\n";
    out << "POINT_DATA " << static_cast<long>(n) * n * n << "\n";
    for (int f = 0; f < 6; ++f) {
        out << "SCALARS " << field_snapshot::names[f] << " double 1\nLOOKUP_TABLE default\n";
        const auto& v = snap.values[f];
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    out << format_double(v(i, j, k)) << '\n';
                }
            }
        }
    }
    return out.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream f{path, std::ios::binary};
    if (!f) {
        throw io_error{"cannot open " + path + " for writing"};
    }
    f << text;
    f.flush();
    if (!f) {
        throw io_error{"failed writing " + path};
    }
}

inline void write_snapshot(const em_state& s, const std::array<knot_vector, 3>& spaces, int resolution,
                           const std::string& path) {
    write_text(path, encode_vtk(sample_state(s, spaces, resolution)));
}

/// Parsed legacy VTK structured-points file (the subset written above).
struct vtk_data {
    std::array<int, 3> dims{};
    std::vector<std::string> names;
    std::vector<std::vector<double>> arrays;
};

inline vtk_data parse_vtk(const std::string& text) {
    std::istringstream in{text};
    std::string line;
    vtk_data d;
    long points = -1;
    std::getline(in, line);
    if (line.rfind("# vtk DataFile", 0) != 0) {
        throw format_error{"missing VTK header"};
    }
    std::getline(in, line); // title
    std::string word;
    while (in >> word) {
        if (word == "ASCII" || word == "DATASET" || word == "STRUCTURED_POINTS") {
            continue;
        }
        if (word == "DIMENSIONS") {
            in >> d.dims[0] >> d.dims[1] >> d.dims[2];
        } else if (word == "ORIGIN" || word == "SPACING") {
            double a, b, c;
            in >> a >> b >> c;
        } else if (word == "POINT_DATA") {
            in >> points;
        } else if (word == "SCALARS") {
            std::string name, type;
            int comps = 0;
            in >> name >> type >> comps;
            in >> word;
            if (word != "LOOKUP_TABLE") {
                throw format_error{"expected LOOKUP_TABLE after SCALARS " + name};
            }
            in >> word;
            std::vector<double> v(points < 0 ? 0 : points);
            for (auto& x : v) {
                if (!(in >> x)) {
                    throw format_error{"truncated array " + name};
                }
            }
            d.names.push_back(name);
            d.arrays.push_back(std::move(v));
        } else {
            throw format_error{"unexpected token " + word};
        }
    }
    return d;
}

inline std::string encode_error_csv(const error_report& report) {
    std::string out = "step,t,l2_E,l2_H,hcurl_E,hcurl_H\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.step) + ',' + format_double(r.t) + ',' + format_double(r.l2_E) + ','
             + format_double(r.l2_H) + ',' + format_double(r.hcurl_E) + ',' + format_double(r.hcurl_H) + '\n';
    }
    return out;
}

inline void write_error_csv(const error_report& report, const std::string& path) {
    write_text(path, encode_error_csv(report));
}

inline error_report parse_error_csv(const std::string& text) {
    std::istringstream in{text};
    std::string line;
    if (!std::getline(in, line) || line != "step,t,l2_E,l2_H,hcurl_E,hcurl_H") {
        throw format_error{"unexpected error CSV header"};
    }
    error_report report;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        error_norms r;
        if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf", &r.step, &r.t, &r.l2_E, &r.l2_H, &r.hcurl_E,
                        &r.hcurl_H)
            != 6) {
            throw format_error{"malformed error CSV row: " + line};
        }
        report.rows.push_back(r);
    }
    return report;
}

} // namespace iga

#endif // IGA_OUTPUT_HPP
