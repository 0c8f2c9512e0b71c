#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gbrbm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// One sample per row.
using SampleMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes disagree.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// Input outside the operation's domain (empty batch, non-finite value, bad parameter).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// Exact enumeration requested beyond the supported number of hidden units.
class CapacityError : public Error {
  public:
    using Error::Error;
};

/// Malformed file contents.
class FormatError : public Error {
  public:
    using Error::Error;
};

class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Execution path for the data-parallel kernels. `reference` is the plain
/// serial implementation kept as a test oracle; `openmp` is the production path.
enum class Backend { reference, openmp };

struct ModelDims {
    std::size_t visible = 0;
    std::size_t hidden = 0;

    friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

}  // namespace gbrbm
