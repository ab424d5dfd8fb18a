#pragma once

#include <complex>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qrank {

using real_t = double;
using complex_t = std::complex<double>;

using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr complex_t kI{0.0, 1.0};

//----------------------------------------------------------------------------
// Error hierarchy. Each category maps onto one CLI exit code.
//----------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

// Stationary problem has more than one solution.
class NonUniqueError : public Error {
public:
    NonUniqueError(std::size_t kernel_dimension, const std::string& what)
        : Error(what), kernel_dimension_(kernel_dimension) {}
    std::size_t kernel_dimension() const noexcept { return kernel_dimension_; }

private:
    std::size_t kernel_dimension_;
};

class NumericalInstabilityError : public Error {
public:
    using Error::Error;
};

class SizeCapError : public Error {
public:
    using Error::Error;
};

class BoundaryContaminationError : public Error {
public:
    using Error::Error;
};

// Raised when a result contradicts a structural theorem (indicates a bug).
class StructuralError : public Error {
public:
    using Error::Error;
};

class InvalidStateError : public Error {
public:
    using Error::Error;
};

//----------------------------------------------------------------------------
// Formatting
//----------------------------------------------------------------------------

// Round-trippable decimal rendering used by every file writer.
inline std::string format_real(real_t x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

template <typename Derived>
real_t max_abs(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().maxCoeff();
}

} // namespace qrank
