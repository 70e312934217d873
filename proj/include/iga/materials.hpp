#ifndef IGA_MATERIALS_HPP
#define IGA_MATERIALS_HPP

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "iga/errors.hpp"
#include "iga/splines.hpp"
#include "iga/tensor.hpp"

namespace iga {

/// Unsigned 8-bit densities on a voxel grid spanning the unit cube.
/// Storage is x-slowest, like tensor3.
class voxel_grid {
public:
    voxel_grid() = default;

    voxel_grid(dims3 dims, std::uint8_t fill = 0) : dims_{dims} {
        if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
            throw parameter_error{"voxel grid dimensions must be positive"};
        }
        data_.assign(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], fill);
    }

    const dims3& dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::uint8_t& operator()(int i, int j, int k) noexcept { return data_[index(i, j, k)]; }
    std::uint8_t operator()(int i, int j, int k) const noexcept { return data_[index(i, j, k)]; }

    std::span<const std::uint8_t> densities() const noexcept { return data_; }

    /// Density of the voxel containing point x of the unit cube.
    std::uint8_t at_point(const std::array<double, 3>& x) const noexcept {
        std::array<int, 3> idx{};
        for (int a = 0; a < 3; ++a) {
            idx[a] = std::clamp(static_cast<int>(x[a] * dims_[a]), 0, dims_[a] - 1);
        }
        return (*this)(idx[0], idx[1], idx[2]);
    }

    /// Center of voxel (i, j, k) in unit-cube coordinates.
    std::array<double, 3> center(int i, int j, int k) const noexcept {
        return {(i + 0.5) / dims_[0], (j + 0.5) / dims_[1], (k + 0.5) / dims_[2]};
    }

    bool operator==(const voxel_grid&) const = default;

private:
    std::size_t index(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
    }

    dims3 dims_{0, 0, 0};
    std::vector<std::uint8_t> data_;
};

/// Byte order of a raw voxel stream.
enum class voxel_order {
    x_fastest, // slice-major image stacks: z slices, y rows, x columns
    z_fastest, // same as the in-memory layout
};

inline voxel_grid load_voxels(std::span<const std::uint8_t> bytes, dims3 dims, voxel_order order) {
    voxel_grid grid{dims};
    const std::size_t expected = grid.size();
    if (bytes.size() != expected) {
        throw format_error{"voxel stream length mismatch: expected " + std::to_string(expected) + " bytes, got "
                           + std::to_string(bytes.size())};
    }
    std::size_t n = 0;
    if (order == voxel_order::z_fastest) {
        for (int i = 0; i < dims[0]; ++i)
            for (int j = 0; j < dims[1]; ++j)
                for (int k = 0; k < dims[2]; ++k)
                    grid(i, j, k) = bytes[n++];
    } else {
        for (int k = 0; k < dims[2]; ++k)
            for (int j = 0; j < dims[1]; ++j)
                for (int i = 0; i < dims[0]; ++i)
                    grid(i, j, k) = bytes[n++];
    }
    return grid;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in{path, std::ios::binary};
    if (!in) {
        throw io_error{"cannot open " + path};
    }
    return {std::istreambuf_iterator<char>{in}, std::istreambuf_iterator<char>{}};
}

inline voxel_grid load_voxel_file(const std::string& path, dims3 dims, voxel_order order) {
    const auto bytes = read_file_bytes(path);
    return load_voxels(bytes, dims, order);
}

inline std::vector<std::uint8_t> save_voxels(const voxel_grid& grid, voxel_order order) {
    const auto& d = grid.dims();
    std::vector<std::uint8_t> out;
    out.reserve(grid.size());
    if (order == voxel_order::z_fastest) {
        for (int i = 0; i < d[0]; ++i)
            for (int j = 0; j < d[1]; ++j)
                for (int k = 0; k < d[2]; ++k)
                    out.push_back(grid(i, j, k));
    } else {
        for (int k = 0; k < d[2]; ++k)
            for (int j = 0; j < d[1]; ++j)
                for (int i = 0; i < d[0]; ++i)
                    out.push_back(grid(i, j, k));
    }
    return out;
}

/// Binary PGM (P5, maxval 255) image: width x height bytes, row-major.
struct pgm_image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

inline pgm_image parse_pgm(std::span<const std::uint8_t> bytes, const std::string& name = "<pgm>") {
    std::size_t pos = 0;
    auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') {
                    ++pos;
                }
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
    };
    auto read_int = [&] {
        skip_space();
        if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
            throw format_error{name + ": malformed PGM header"};
        }
        long v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos])) {
            v = v * 10 + (bytes[pos++] - '0');
            if (v > 1 << 24) {
                throw format_error{name + ": PGM header value too large"};
            }
        }
        return static_cast<int>(v);
    };
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw format_error{name + ": not a binary PGM (P5) file"};
    }
    pos = 2;
    pgm_image img;
    img.width = read_int();
    img.height = read_int();
    const int maxval = read_int();
    if (maxval != 255) {
        throw format_error{name + ": PGM maxval must be 255, got " + std::to_string(maxval)};
    }
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
        throw format_error{name + ": malformed PGM header"};
    }
    ++pos;
    const std::size_t expected = static_cast<std::size_t>(img.width) * img.height;
    if (bytes.size() - pos != expected) {
        throw format_error{name + ": PGM pixel data length mismatch: expected " + std::to_string(expected)
                           + " bytes, got " + std::to_string(bytes.size() - pos)};
    }
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
    return img;
}

inline std::vector<std::uint8_t> encode_pgm(const pgm_image& img) {
    const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

/// Expands a printf-style pattern with one integer conversion, e.g. "slice_%03d.pgm".
inline std::string slice_path(const std::string& pattern, int index) {
    const int len = std::snprintf(nullptr, 0, pattern.c_str(), index);
    if (len < 0) {
        throw parameter_error{"invalid slice pattern " + pattern};
    }
    std::string s(static_cast<std::size_t>(len) + 1, '\0');
    std::snprintf(s.data(), s.size(), pattern.c_str(), index);
    s.resize(static_cast<std::size_t>(len));
    return s;
}

/// Stack of PGM slices along z; slice k is read from pattern(first_index + k),
/// image columns map to x and rows to y.
inline voxel_grid load_pgm_stack(const std::string& pattern, int n_slices, int first_index = 0) {
    if (n_slices <= 0) {
        throw parameter_error{"slice count must be positive"};
    }
    voxel_grid grid;
    for (int k = 0; k < n_slices; ++k) {
        const auto path = slice_path(pattern, first_index + k);
        const auto img = parse_pgm(read_file_bytes(path), path);
        if (k == 0) {
            grid = voxel_grid{{img.width, img.height, n_slices}};
        } else if (img.width != grid.dims()[0] || img.height != grid.dims()[1]) {
            throw format_error{path + ": slice size differs from the first slice"};
        }
        for (int j = 0; j < img.height; ++j) {
            for (int i = 0; i < img.width; ++i) {
                grid(i, j, k) = img.pixels[static_cast<std::size_t>(j) * img.width + i];
            }
        }
    }
    return grid;
}

enum class material_class { air = 0, tissue = 1, skull = 2 };

inline const char* to_string(material_class c) {
    switch (c) {
    case material_class::air: return "air";
    case material_class::tissue: return "tissue";
    default: return "skull";
    }
}

struct material_values {
    double epsilon = 1.0;
    double mu = 1.0;
};

struct material_table {
    std::array<material_values, 3> values{}; // indexed by material_class
    int air_threshold = 1;
    int skull_threshold = 240;

    const material_values& operator[](material_class c) const { return values[static_cast<int>(c)]; }

    void validate(double delta = 0.0) const {
        if (!(air_threshold < skull_threshold)) {
            throw parameter_error{"air threshold must be below skull threshold"};
        }
        for (int c = 0; c < 3; ++c) {
            const auto& v = values[c];
            if (!(v.epsilon > delta) || !(v.mu > delta) || !std::isfinite(v.epsilon) || !std::isfinite(v.mu)) {
                throw parameter_error{std::string{"material "} + to_string(static_cast<material_class>(c))
                                      + ": epsilon and mu must be positive"};
            }
        }
    }
};

/// Air up to and including the air threshold, skull from the skull threshold
/// on, tissue strictly in between.
inline material_class classify(int density, const material_table& table = {}) {
    if (density <= table.air_threshold) {
        return material_class::air;
    }
    if (density >= table.skull_threshold) {
        return material_class::skull;
    }
    return material_class::tissue;
}

/// Material values attached to each test function (r, s, t).
struct coefficient_field {
    tensor3 epsilon;
    tensor3 mu;

    const dims3& dims() const noexcept { return epsilon.dims(); }

    static coefficient_field uniform(const dims3& dims, double eps, double mu) {
        return {tensor3{dims, eps}, tensor3{dims, mu}};
    }

    void validate(double delta = 0.0) const {
        if (epsilon.dims() != mu.dims()) {
            throw parameter_error{"epsilon and mu fields differ in shape"};
        }
        for (std::size_t n = 0; n < epsilon.size(); ++n) {
            const double e = epsilon.data()[n];
            const double m = mu.data()[n];
            if (!(e > delta) || !(m > delta) || !std::isfinite(e) || !std::isfinite(m)) {
                throw parameter_error{"material coefficients must be finite and positive"};
            }
        }
    }
};

/// One material per test function: nearest-voxel density at the Greville
/// point of the function, classified through the table.
inline coefficient_field sample_coefficients(const voxel_grid& grid, const std::array<knot_vector, 3>& spaces,
                                             const material_table& table) {
    std::array<std::vector<double>, 3> g;
    dims3 dims{};
    for (int a = 0; a < 3; ++a) {
        g[a] = greville_points(spaces[a]);
        const double lo = spaces[a].lower();
        const double hi = spaces[a].upper();
        for (double& x : g[a]) {
            x = (x - lo) / (hi - lo);
        }
        dims[a] = spaces[a].n_basis();
    }
    coefficient_field field{tensor3{dims}, tensor3{dims}};
    for (int r = 0; r < dims[0]; ++r) {
        for (int s = 0; s < dims[1]; ++s) {
            for (int t = 0; t < dims[2]; ++t) {
                const auto c = classify(grid.at_point({g[0][r], g[1][s], g[2][t]}), table);
                field.epsilon(r, s, t) = table[c].epsilon;
                field.mu(r, s, t) = table[c].mu;
            }
        }
    }
    return field;
}

struct phantom_spec {
    double outer_radius = 0.4;
    double skull_thickness = 0.05;
    std::array<double, 3> center{0.5, 0.5, 0.5};
    dims3 voxels{64, 64, 64};
};

inline constexpr std::uint8_t phantom_tissue_density = 120;
inline constexpr std::uint8_t phantom_skull_density = 255;

/// Concentric-sphere head stand-in: tissue core, skull shell, air outside.
inline voxel_grid synthetic_phantom(const phantom_spec& spec) {
    if (spec.outer_radius < 0.0 || spec.skull_thickness < 0.0 || spec.skull_thickness > spec.outer_radius) {
        throw parameter_error{"phantom radii must satisfy 0 <= skull_thickness <= outer_radius"};
    }
    for (int a = 0; a < 3; ++a) {
        const double c = spec.center[a];
        if (spec.outer_radius > 0.0 && (c - spec.outer_radius < 0.0 || c + spec.outer_radius > 1.0)) {
            throw parameter_error{"phantom sphere extends outside the unit cube"};
        }
    }
    voxel_grid grid{spec.voxels};
    const double inner = spec.outer_radius - spec.skull_thickness;
    const auto& d = spec.voxels;
    for (int i = 0; i < d[0]; ++i) {
        for (int j = 0; j < d[1]; ++j) {
            for (int k = 0; k < d[2]; ++k) {
                const auto x = grid.center(i, j, k);
                double r2 = 0.0;
                for (int a = 0; a < 3; ++a) {
                    r2 += (x[a] - spec.center[a]) * (x[a] - spec.center[a]);
                }
                const double r = std::sqrt(r2);
                if (r < inner) {
                    grid(i, j, k) = phantom_tissue_density;
                } else if (r < spec.outer_radius) {
                    grid(i, j, k) = phantom_skull_density;
                }
            }
        }
    }
    return grid;
}

} // namespace iga

#endif // IGA_MATERIALS_HPP
