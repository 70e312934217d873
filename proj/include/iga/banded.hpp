#ifndef IGA_BANDED_HPP
#define IGA_BANDED_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "iga/errors.hpp"
#include "iga/splines.hpp"

namespace iga {

/// Square matrix with nonzeros confined to |i - j| <= k, stored row-major as
/// n rows of 2k+1 diagonals.
class banded_matrix {
public:
    banded_matrix() = default;

    banded_matrix(int n, int half_bandwidth)
    : n_{n}, k_{half_bandwidth}, data_(static_cast<std::size_t>(n) * (2 * half_bandwidth + 1), 0.0) {
        if (n < 0 || half_bandwidth < 0) {
            throw parameter_error{"banded matrix dimensions must be nonnegative"};
        }
    }

    int size() const noexcept { return n_; }
    int half_bandwidth() const noexcept { return k_; }

    bool in_band(int i, int j) const noexcept { return std::abs(i - j) <= k_; }

    double operator()(int i, int j) const noexcept {
        return in_band(i, j) ? data_[index(i, j)] : 0.0;
    }

    double& at(int i, int j) {
        if (i < 0 || j < 0 || i >= n_ || j >= n_ || !in_band(i, j)) {
            throw parameter_error{"entry (" + std::to_string(i) + ", " + std::to_string(j)
                                  + ") outside band"};
        }
        return data_[index(i, j)];
    }

    /// First and one-past-last column of row i inside the band.
    int row_begin(int i) const noexcept { return std::max(0, i - k_); }
    int row_end(int i) const noexcept { return std::min(n_, i + k_ + 1); }

    const std::vector<double>& band() const noexcept { return data_; }

    /// y = A x
    std::vector<double> multiply(std::span<const double> x) const {
        if (static_cast<int>(x.size()) != n_) {
            throw parameter_error{"vector length does not match matrix dimension"};
        }
        std::vector<double> y(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            double sum = 0.0;
            for (int j = row_begin(i); j < row_end(i); ++j) {
                sum += data_[index(i, j)] * x[j];
            }
            y[i] = sum;
        }
        return y;
    }

    banded_matrix transposed() const {
        banded_matrix t{n_, k_};
        for (int i = 0; i < n_; ++i) {
            for (int j = row_begin(i); j < row_end(i); ++j) {
                t.data_[t.index(j, i)] = data_[index(i, j)];
            }
        }
        return t;
    }

    bool operator==(const banded_matrix&) const = default;

private:
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(i) * (2 * k_ + 1) + (j - i + k_);
    }

    int n_ = 0;
    int k_ = 0;
    std::vector<double> data_;
};

/// Galerkin matrix kinds; rows are test functions, columns trial functions.
enum class matrix_kind {
    mass,                  // int B_i B_l
    stiffness,             // int B_i' B_l'
    advection_trial_deriv, // int B_i B_l'   (derivative on the column function)
    advection_test_deriv,  // int B_i' B_l   (derivative on the row function)
};

inline banded_matrix assemble_1d(const knot_vector& kv, matrix_kind kind, const quadrature_rule& rule) {
    const int n = kv.n_basis();
    const int p = kv.degree();
    banded_matrix A{n, p};
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const auto b = eval_basis(kv, rule.points[q]);
        const double w = rule.weights[q];
        for (int a = 0; a <= p; ++a) {
            for (int c = 0; c <= p; ++c) {
                double v = 0.0;
                switch (kind) {
                case matrix_kind::mass: v = b.values[a] * b.values[c]; break;
                case matrix_kind::stiffness: v = b.derivatives[a] * b.derivatives[c]; break;
                case matrix_kind::advection_trial_deriv: v = b.values[a] * b.derivatives[c]; break;
                case matrix_kind::advection_test_deriv: v = b.derivatives[a] * b.values[c]; break;
                }
                A.at(b.first + a, b.first + c) += w * v;
            }
        }
    }
    return A;
}

/// Row-wise M[i,:] + c_i S[i,:].
inline banded_matrix combine_mass_plus_scaled_stiffness(const banded_matrix& M, const banded_matrix& S,
                                                        std::span<const double> row_coefficients) {
    if (M.size() != S.size() || M.half_bandwidth() != S.half_bandwidth()) {
        throw parameter_error{"mass and stiffness matrices differ in shape"};
    }
    if (static_cast<int>(row_coefficients.size()) != M.size()) {
        throw parameter_error{"coefficient count " + std::to_string(row_coefficients.size())
                              + " does not match matrix dimension " + std::to_string(M.size())};
    }
    banded_matrix out{M.size(), M.half_bandwidth()};
    for (int i = 0; i < M.size(); ++i) {
        const double c = row_coefficients[i];
        if (!std::isfinite(c) || c < 0.0) {
            throw parameter_error{"row coefficient must be finite and nonnegative"};
        }
        for (int j = M.row_begin(i); j < M.row_end(i); ++j) {
            out.at(i, j) = M(i, j) + c * S(i, j);
        }
    }
    return out;
}

inline banded_matrix combine_mass_plus_scaled_stiffness(const banded_matrix& M, const banded_matrix& S,
                                                        double coefficient) {
    std::vector<double> c(M.size(), coefficient);
    return combine_mass_plus_scaled_stiffness(M, S, c);
}

/// Identity rows at both ends: eliminates the boundary B-splines.
inline banded_matrix with_fixed_ends(banded_matrix A) {
    const int n = A.size();
    for (int i : {0, n - 1}) {
        for (int j = A.row_begin(i); j < A.row_end(i); ++j) {
            A.at(i, j) = i == j ? 1.0 : 0.0;
        }
    }
    return A;
}

/// Strided view of an n x m block of right-hand sides: entry (i, c) lives at
/// base[i * row_stride + c * col_stride].
struct rhs_block {
    double* base = nullptr;
    int rows = 0;
    long cols = 0;
    std::ptrdiff_t row_stride = 0;
    std::ptrdiff_t col_stride = 1;
};

/// Banded LU with partial pivoting inside the band. U has upper bandwidth 2k
/// after row interchanges; each row stores columns [i-k, i+2k].
class banded_lu {
public:
    explicit banded_lu(const banded_matrix& A) : n_{A.size()}, k_{A.half_bandwidth()}, pivot_(A.size()) {
        width_ = 3 * k_ + 1;
        lu_.assign(static_cast<std::size_t>(n_) * width_, 0.0);
        double scale = 0.0;
        for (int i = 0; i < n_; ++i) {
            for (int j = A.row_begin(i); j < A.row_end(i); ++j) {
                ref(i, j) = A(i, j);
                scale = std::max(scale, std::abs(A(i, j)));
            }
        }
        const double tiny = 1e-14 * scale;

        for (int j = 0; j < n_; ++j) {
            const int last_row = std::min(n_ - 1, j + k_);
            int p = j;
            double best = std::abs(ref(j, j));
            for (int i = j + 1; i <= last_row; ++i) {
                if (std::abs(ref(i, j)) > best) {
                    best = std::abs(ref(i, j));
                    p = i;
                }
            }
            pivot_[j] = p;
            if (!(best > tiny)) {
                throw singular_error{"singular banded system: pivot below threshold at row "
                                         + std::to_string(j),
                                     j};
            }
            const int last_col = std::min(n_ - 1, j + 2 * k_);
            if (p != j) {
                for (int c = j; c <= last_col; ++c) {
                    std::swap(ref(j, c), ref(p, c));
                }
            }
            const double inv = 1.0 / ref(j, j);
            for (int i = j + 1; i <= last_row; ++i) {
                const double l = ref(i, j) * inv;
                ref(i, j) = l;
                if (l != 0.0) {
                    for (int c = j + 1; c <= last_col; ++c) {
                        ref(i, c) -= l * ref(j, c);
                    }
                }
            }
        }
    }

    int size() const noexcept { return n_; }
    int half_bandwidth() const noexcept { return k_; }

    /// Solve in place for every column of the block.
    void solve(const rhs_block& b) const {
        if (b.rows != n_) {
            throw parameter_error{"right-hand side has " + std::to_string(b.rows) + " rows, expected "
                                  + std::to_string(n_)};
        }
        if (b.cols == 0 || n_ == 0) {
            return;
        }
        if (b.col_stride == 1) {
            solve_rowwise(b);
        } else {
            for (long c = 0; c < b.cols; ++c) {
                solve_column(b.base + c * b.col_stride, b.row_stride);
            }
        }
    }

    void solve(std::span<double> x) const {
        if (static_cast<int>(x.size()) != n_) {
            throw parameter_error{"vector length does not match factorization dimension"};
        }
        solve_column(x.data(), 1);
    }

private:
    double& ref(int i, int j) { return lu_[static_cast<std::size_t>(i) * width_ + (j - i + k_)]; }
    double get(int i, int j) const { return lu_[static_cast<std::size_t>(i) * width_ + (j - i + k_)]; }

    // Same arithmetic per column as solve_rowwise, so results do not depend on
    // the storage layout of the block.
    void solve_column(double* x, std::ptrdiff_t stride) const {
        for (int j = 0; j < n_; ++j) {
            const int p = pivot_[j];
            if (p != j) {
                std::swap(x[j * stride], x[p * stride]);
            }
            const double xj = x[j * stride];
            const int last_row = std::min(n_ - 1, j + k_);
            for (int i = j + 1; i <= last_row; ++i) {
                x[i * stride] -= get(i, j) * xj;
            }
        }
        for (int i = n_ - 1; i >= 0; --i) {
            const int last_col = std::min(n_ - 1, i + 2 * k_);
            double v = x[i * stride];
            for (int c = i + 1; c <= last_col; ++c) {
                v -= get(i, c) * x[c * stride];
            }
            x[i * stride] = v / get(i, i);
        }
    }

    void solve_rowwise(const rhs_block& b) const {
        const long m = b.cols;
        auto row = [&](int i) { return b.base + i * b.row_stride; };
        for (int j = 0; j < n_; ++j) {
            const int p = pivot_[j];
            if (p != j) {
                std::swap_ranges(row(j), row(j) + m, row(p));
            }
            const double* xj = row(j);
            const int last_row = std::min(n_ - 1, j + k_);
            for (int i = j + 1; i <= last_row; ++i) {
                const double l = get(i, j);
                double* xi = row(i);
                for (long c = 0; c < m; ++c) {
                    xi[c] -= l * xj[c];
                }
            }
        }
        for (int i = n_ - 1; i >= 0; --i) {
            const int last_col = std::min(n_ - 1, i + 2 * k_);
            double* xi = row(i);
            for (int c2 = i + 1; c2 <= last_col; ++c2) {
                const double u = get(i, c2);
                const double* xc = row(c2);
                for (long c = 0; c < m; ++c) {
                    xi[c] -= u * xc[c];
                }
            }
            const double d = get(i, i);
            for (long c = 0; c < m; ++c) {
                xi[c] = xi[c] / d;
            }
        }
    }

    int n_ = 0;
    int k_ = 0;
    int width_ = 0;
    std::vector<double> lu_;
    std::vector<int> pivot_;
};

inline banded_lu factorize(const banded_matrix& A) { return banded_lu{A}; }

/// Solve A X = B for a row-major n x m block B; returns X.
inline std::vector<double> solve_multi_rhs(const banded_lu& f, std::span<const double> rhs, long m) {
    if (m < 0 || static_cast<long>(rhs.size()) != static_cast<long>(f.size()) * m) {
        throw parameter_error{"right-hand side shape does not match " + std::to_string(f.size())
                              + " x " + std::to_string(m)};
    }
    std::vector<double> x(rhs.begin(), rhs.end());
    if (m > 0) {
        f.solve(rhs_block{x.data(), f.size(), m, m, 1});
    }
    return x;
}

} // namespace iga

#endif // IGA_BANDED_HPP
