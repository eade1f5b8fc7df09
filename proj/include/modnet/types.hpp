#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace modnet {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = MatrixX<double>;
using Vector = VectorX<double>;
using IntVector = Eigen::VectorXi;

// Input files that do not conform to the documented formats.
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Iterative routines that fail to reach their tolerance.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested quantity is undefined for the given parameters (e.g. the
// residual-variant limit when the connectivity matrix has full rank).
class theorem_error : public std::domain_error {
public:
    explicit theorem_error(const std::string& msg) : std::domain_error(msg) {}
};

}  // namespace modnet
