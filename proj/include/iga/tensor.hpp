#ifndef IGA_TENSOR_HPP
#define IGA_TENSOR_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "iga/banded.hpp"
#include "iga/errors.hpp"
#include "iga/parallel.hpp"

namespace iga {

using dims3 = std::array<int, 3>;

/// Rank-3 coefficient array. Layout is x-slowest: (i, j, k) -> (i*ny + j)*nz + k.
class tensor3 {
public:
    tensor3() = default;

    explicit tensor3(dims3 dims, double fill = 0.0) : dims_{dims} {
        for (int d : dims) {
            if (d < 0) {
                throw parameter_error{"tensor dimensions must be nonnegative"};
            }
        }
        data_.assign(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], fill);
    }

    const dims3& dims() const noexcept { return dims_; }
    int dim(int axis) const noexcept { return dims_[axis]; }
    std::size_t size() const noexcept { return data_.size(); }

    std::size_t index(int i, int j, int k) const noexcept {
        return (static_cast<std::size_t>(i) * dims_[1] + j) * dims_[2] + k;
    }

    double& operator()(int i, int j, int k) noexcept { return data_[index(i, j, k)]; }
    const double& operator()(int i, int j, int k) const noexcept { return data_[index(i, j, k)]; }

    double* data() noexcept { return data_.data(); }
    const double* data() const noexcept { return data_.data(); }
    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }

    tensor3& operator+=(const tensor3& o) {
        check_same(o);
        for (std::size_t n = 0; n < data_.size(); ++n) {
            data_[n] += o.data_[n];
        }
        return *this;
    }

    tensor3& operator-=(const tensor3& o) {
        check_same(o);
        for (std::size_t n = 0; n < data_.size(); ++n) {
            data_[n] -= o.data_[n];
        }
        return *this;
    }

    tensor3& operator*=(double s) noexcept {
        for (double& v : data_) {
            v *= s;
        }
        return *this;
    }

    /// this += s * o
    void axpy(double s, const tensor3& o) {
        check_same(o);
        for (std::size_t n = 0; n < data_.size(); ++n) {
            data_[n] += s * o.data_[n];
        }
    }

    /// Entrywise product, used for per-test-function row scaling.
    tensor3& operator*=(const tensor3& o) {
        check_same(o);
        for (std::size_t n = 0; n < data_.size(); ++n) {
            data_[n] *= o.data_[n];
        }
        return *this;
    }

    double max_abs() const noexcept {
        double m = 0.0;
        for (double v : data_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    bool all_finite() const noexcept {
        for (double v : data_) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

    bool operator==(const tensor3&) const = default;

private:
    void check_same(const tensor3& o) const {
        if (o.dims_ != dims_) {
            throw parameter_error{"tensor dimensions differ"};
        }
    }

    dims3 dims_{0, 0, 0};
    std::vector<double> data_;
};

inline tensor3 operator+(tensor3 a, const tensor3& b) { return a += b; }
inline tensor3 operator-(tensor3 a, const tensor3& b) { return a -= b; }
inline tensor3 operator*(double s, tensor3 a) { return a *= s; }

/// Maximum entrywise difference relative to the larger of the two magnitudes.
inline double relative_difference(const tensor3& a, const tensor3& b) {
    if (a.dims() != b.dims()) {
        throw parameter_error{"tensor dimensions differ"};
    }
    double diff = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) {
        diff = std::max(diff, std::abs(a.data()[n] - b.data()[n]));
    }
    const double scale = std::max(a.max_abs(), b.max_abs());
    return scale > 0.0 ? diff / scale : diff;
}

/// Fibers along one axis: element t of fiber c lives at base(c) + t*stride.
struct fiber_layout {
    int axis;
    int length;
    long count;
    std::ptrdiff_t stride;
    dims3 dims;

    explicit fiber_layout(const dims3& d, int a) : axis{a}, length{d[a]}, dims{d} {
        count = static_cast<long>(d[0]) * d[1] * d[2] / std::max(1, d[a]);
        if (d[a] == 0) {
            count = 0;
        }
        stride = a == 0 ? static_cast<std::ptrdiff_t>(d[1]) * d[2] : a == 1 ? d[2] : 1;
    }

    std::ptrdiff_t base(long c) const noexcept {
        switch (axis) {
        case 0: return c;
        case 1: return (c / dims[2]) * static_cast<std::ptrdiff_t>(dims[1]) * dims[2] + c % dims[2];
        default: return c * dims[2];
        }
    }
};

/// Reorders t into a row-major (n_axis x n_other) matrix whose columns are
/// the fibers along `axis` in fiber_layout order.
inline std::vector<double> to_axis_major(const tensor3& t, int axis) {
    const fiber_layout f{t.dims(), axis};
    std::vector<double> out(t.size());
    for (long c = 0; c < f.count; ++c) {
        const auto b = f.base(c);
        for (int s = 0; s < f.length; ++s) {
            out[static_cast<std::size_t>(s) * f.count + c] = t.data()[b + s * f.stride];
        }
    }
    return out;
}

inline tensor3 from_axis_major(std::span<const double> m, const dims3& dims, int axis) {
    tensor3 t{dims};
    const fiber_layout f{dims, axis};
    if (m.size() != t.size()) {
        throw parameter_error{"axis-major buffer size mismatch"};
    }
    for (long c = 0; c < f.count; ++c) {
        const auto b = f.base(c);
        for (int s = 0; s < f.length; ++s) {
            t.data()[b + s * f.stride] = m[static_cast<std::size_t>(s) * f.count + c];
        }
    }
    return t;
}

namespace detail {

/// Calls fn(rhs_block) for blocks that together cover every fiber along
/// `axis` exactly once, keeping the row-operation inner loop contiguous where
/// the layout allows it.
template <typename Fn>
void for_each_block(double* data, const dims3& d, int axis, Fn&& fn) {
    const long yz = static_cast<long>(d[1]) * d[2];
    switch (axis) {
    case 0:
        parallel_for(yz, 4096, [&](long b, long e) {
            fn(rhs_block{data + b, d[0], e - b, yz, 1});
        });
        break;
    case 1:
        parallel_for(d[0], 8, [&](long b, long e) {
            for (long i = b; i < e; ++i) {
                fn(rhs_block{data + i * yz, d[1], d[2], d[2], 1});
            }
        });
        break;
    default:
        parallel_for(static_cast<long>(d[0]) * d[1], 512, [&](long b, long e) {
            fn(rhs_block{data + b * d[2], d[2], e - b, 1, d[2]});
        });
        break;
    }
}

/// out = A in, fiberwise along the block's rows.
inline void apply_block(const banded_matrix& A, const rhs_block& in, const rhs_block& out) {
    const int n = A.size();
    if (in.col_stride == 1) {
        for (int i = 0; i < n; ++i) {
            double* yi = out.base + i * out.row_stride;
            std::fill(yi, yi + out.cols, 0.0);
            for (int j = A.row_begin(i); j < A.row_end(i); ++j) {
                const double a = A(i, j);
                const double* xj = in.base + j * in.row_stride;
                for (long c = 0; c < in.cols; ++c) {
                    yi[c] += a * xj[c];
                }
            }
        }
    } else {
        for (long c = 0; c < in.cols; ++c) {
            const double* x = in.base + c * in.col_stride;
            double* y = out.base + c * out.col_stride;
            for (int i = 0; i < n; ++i) {
                double sum = 0.0;
                for (int j = A.row_begin(i); j < A.row_end(i); ++j) {
                    sum += A(i, j) * x[j * in.row_stride];
                }
                y[i * out.row_stride] = sum;
            }
        }
    }
}

} // namespace detail

/// One factor of a Kronecker product: a banded matrix or the identity.
class kron_factor {
public:
    kron_factor() = default; // identity
    kron_factor(const banded_matrix& m) : matrix_{&m} { } // NOLINT(google-explicit-constructor)

    bool is_identity() const noexcept { return matrix_ == nullptr; }
    const banded_matrix& matrix() const noexcept { return *matrix_; }

private:
    const banded_matrix* matrix_ = nullptr;
};

inline const kron_factor identity{};

/// Applies a square banded matrix along one axis of u.
inline tensor3 apply_along(const banded_matrix& A, const tensor3& u, int axis) {
    if (A.size() != u.dim(axis)) {
        throw parameter_error{"matrix dimension " + std::to_string(A.size()) + " does not match tensor axis "
                              + std::to_string(axis) + " of size " + std::to_string(u.dim(axis))};
    }
    tensor3 out{u.dims()};
    const std::ptrdiff_t shift = out.data() - u.data();
    detail::for_each_block(const_cast<double*>(u.data()), u.dims(), axis, [&](const rhs_block& in) {
        rhs_block o = in;
        o.base = in.base + shift;
        detail::apply_block(A, in, o);
    });
    return out;
}

/// (Ax ⊗ Ay ⊗ Az) vec(u), axis by axis without forming the product.
inline tensor3 kron_apply(const kron_factor& ax, const kron_factor& ay, const kron_factor& az, const tensor3& u) {
    const std::array<const kron_factor*, 3> f{&ax, &ay, &az};
    for (int a = 0; a < 3; ++a) {
        if (!f[a]->is_identity() && f[a]->matrix().size() != u.dim(a)) {
            throw parameter_error{"Kronecker factor " + std::to_string(a) + " has dimension "
                                  + std::to_string(f[a]->matrix().size()) + ", tensor axis has "
                                  + std::to_string(u.dim(a))};
        }
    }
    tensor3 out = u;
    for (int a = 0; a < 3; ++a) {
        if (!f[a]->is_identity()) {
            out = apply_along(f[a]->matrix(), out, a);
        }
    }
    return out;
}

/// Factorizations of M + diag(c) S keyed by the coefficient vector c.
/// Lookups may run concurrently; insertions are serialized.
class factorization_cache {
public:
    factorization_cache(banded_matrix mass, banded_matrix stiffness, bool fixed_ends = false)
    : mass_{std::move(mass)}, stiffness_{std::move(stiffness)}, fixed_ends_{fixed_ends} {
        if (mass_.size() != stiffness_.size()) {
            throw parameter_error{"mass and stiffness matrices differ in shape"};
        }
    }

    int size() const noexcept { return mass_.size(); }

    std::shared_ptr<const banded_lu> get(std::span<const double> coefficients) {
        std::vector<double> key(coefficients.begin(), coefficients.end());
        {
            std::shared_lock lock{mutex_};
            if (auto it = entries_.find(key); it != entries_.end()) {
                return it->second;
            }
        }
        auto A = combine_mass_plus_scaled_stiffness(mass_, stiffness_, key);
        auto lu = std::make_shared<const banded_lu>(fixed_ends_ ? with_fixed_ends(std::move(A)) : A);
        std::unique_lock lock{mutex_};
        auto [it, inserted] = entries_.emplace(std::move(key), std::move(lu));
        return it->second;
    }

    std::size_t entries() const {
        std::shared_lock lock{mutex_};
        return entries_.size();
    }

private:
    banded_matrix mass_;
    banded_matrix stiffness_;
    bool fixed_ends_ = false;
    mutable std::shared_mutex mutex_;
    std::map<std::vector<double>, std::shared_ptr<const banded_lu>> entries_;
};

/// How one direction sweep solves its fibers: a single factorization shared
/// by all fibers, or per-fiber factorizations drawn from a cache.
class sweep_plan {
public:
    struct fiber_group {
        std::shared_ptr<const banded_lu> factor;
        std::vector<long> columns;
    };

    static sweep_plan constant(int axis, std::shared_ptr<const banded_lu> factor) {
        sweep_plan p;
        p.axis_ = axis;
        p.factor_ = std::move(factor);
        return p;
    }

    /// `coefficients` holds one stiffness weight per test function; the
    /// fiber along `axis` through column c uses the weights on that fiber.
    static sweep_plan variable(int axis, std::shared_ptr<factorization_cache> cache, const tensor3& coefficients) {
        if (cache->size() != coefficients.dim(axis)) {
            throw parameter_error{"coefficient field does not match sweep dimension"};
        }
        sweep_plan p;
        p.axis_ = axis;
        p.cache_ = std::move(cache);
        p.dims_ = coefficients.dims();
        const fiber_layout f{coefficients.dims(), axis};
        std::map<const banded_lu*, std::size_t> slot;
        std::vector<double> c(f.length);
        for (long col = 0; col < f.count; ++col) {
            const auto b = f.base(col);
            for (int s = 0; s < f.length; ++s) {
                c[s] = coefficients.data()[b + s * f.stride];
            }
            std::shared_ptr<const banded_lu> lu;
            try {
                lu = p.cache_->get(c);
            } catch (const singular_error& e) {
                throw singular_error{std::string{e.what()} + " (axis " + std::to_string(axis) + ", column "
                                         + std::to_string(col) + ")",
                                     e.row(), axis, col};
            }
            auto [it, inserted] = slot.emplace(lu.get(), p.groups_.size());
            if (inserted) {
                p.groups_.push_back({lu, {}});
            }
            p.groups_[it->second].columns.push_back(col);
        }
        return p;
    }

    int axis() const noexcept { return axis_; }
    bool is_variable() const noexcept { return cache_ != nullptr; }
    const std::vector<fiber_group>& groups() const noexcept { return groups_; }
    const std::shared_ptr<const banded_lu>& factor() const noexcept { return factor_; }
    const factorization_cache* cache() const noexcept { return cache_.get(); }

    /// Factorization used for fiber `column`.
    const banded_lu& factorization_for(long column) const {
        if (!is_variable()) {
            return *factor_;
        }
        for (const auto& g : groups_) {
            for (long c : g.columns) {
                if (c == column) {
                    return *g.factor;
                }
            }
        }
        throw parameter_error{"column not covered by sweep plan"};
    }

    int dimension() const noexcept { return is_variable() ? cache_->size() : factor_->size(); }

private:
    int axis_ = 0;
    std::shared_ptr<const banded_lu> factor_;
    std::shared_ptr<factorization_cache> cache_;
    std::vector<fiber_group> groups_;
    dims3 dims_{0, 0, 0};
};

/// Solves one banded system per fiber along the plan's axis.
inline tensor3 sweep_solve(const sweep_plan& plan, const tensor3& rhs) {
    const int axis = plan.axis();
    if (plan.dimension() != rhs.dim(axis)) {
        throw parameter_error{"sweep dimension " + std::to_string(plan.dimension())
                              + " does not match right-hand side axis " + std::to_string(axis) + " of size "
                              + std::to_string(rhs.dim(axis))};
    }
    tensor3 x = rhs;
    if (!plan.is_variable()) {
        const banded_lu& lu = *plan.factor();
        detail::for_each_block(x.data(), x.dims(), axis, [&](const rhs_block& b) { lu.solve(b); });
        return x;
    }
    const fiber_layout f{x.dims(), axis};
    const auto& groups = plan.groups();
    parallel_for(static_cast<long>(groups.size()), 1, [&](long gb, long ge) {
        std::vector<double> buffer;
        for (long g = gb; g < ge; ++g) {
            const auto& cols = groups[g].columns;
            const long m = static_cast<long>(cols.size());
            buffer.resize(static_cast<std::size_t>(f.length) * m);
            for (long c = 0; c < m; ++c) {
                const auto b = f.base(cols[c]);
                for (int s = 0; s < f.length; ++s) {
                    buffer[static_cast<std::size_t>(s) * m + c] = x.data()[b + s * f.stride];
                }
            }
            groups[g].factor->solve(rhs_block{buffer.data(), f.length, m, m, 1});
            for (long c = 0; c < m; ++c) {
                const auto b = f.base(cols[c]);
                for (int s = 0; s < f.length; ++s) {
                    x.data()[b + s * f.stride] = buffer[static_cast<std::size_t>(s) * m + c];
                }
            }
        }
    });
    return x;
}

/// Inverse of a three-factor Kronecker system, one sweep per axis.
///
/// Variable-coefficient sweeps go first: their fibers are indexed by the
/// test functions of the other two axes, which is only valid before those
/// axes are solved. Constant sweeps follow in x, y, z order.
inline tensor3 adi_solve_block(const std::array<sweep_plan, 3>& plans, const tensor3& rhs) {
    for (int a = 0; a < 3; ++a) {
        if (plans[a].axis() != a) {
            throw parameter_error{"sweep plans must be ordered x, y, z"};
        }
    }
    tensor3 x = rhs;
    for (const auto& p : plans) {
        if (p.is_variable()) {
            x = sweep_solve(p, x);
        }
    }
    for (const auto& p : plans) {
        if (!p.is_variable()) {
            x = sweep_solve(p, x);
        }
    }
    return x;
}

} // namespace iga

#endif // IGA_TENSOR_HPP
