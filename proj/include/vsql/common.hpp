#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace vsql {

using cxd = std::complex<double>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

// Error taxonomy. The CLI maps ConfigError/ParseError to exit code 2
// (bad invocation or malformed input) and everything else to exit code 1.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class DomainError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TrainError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace vsql
