#ifndef IGA_ERRORS_HPP
#define IGA_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace iga {

/// Invalid argument or configuration value.
class parameter_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation point outside the parametric domain.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Numerically singular banded system. Carries the offending row (and, for
/// direction sweeps, the axis and fiber column).
class singular_error : public std::runtime_error {
public:
    singular_error(const std::string& what, int row, int axis = -1, long column = -1)
    : std::runtime_error{what}, row_{row}, axis_{axis}, column_{column} { }

    int row() const noexcept { return row_; }
    int axis() const noexcept { return axis_; }
    long column() const noexcept { return column_; }

private:
    int row_;
    int axis_;
    long column_;
};

/// Malformed input data (voxel streams, PGM slices, CSV).
class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system failure; message carries the path.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Problem too large for a dense reference computation.
class size_guard_error : public std::length_error {
public:
    using std::length_error::length_error;
};

} // namespace iga

#endif // IGA_ERRORS_HPP
