#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace mvridge {

using Complex = std::complex<double>;

// Row-major so that each channel's (or scale's) time series is contiguous in
// memory; per-scale FFTs and along-time ridge walks stay cache friendly.
using RealMatrix    = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Malformed user data: empty input, shape mismatch, unparseable files.
struct invalid_input : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numeric validation failure (Nyquist violation, non-finite samples).
/// A kind of invalid input, but mapped to a distinct CLI exit code.
struct numeric_error : invalid_input {
    using invalid_input::invalid_input;
};

/// A derivative plane was requested from a transform built without it.
struct missing_derivative : std::logic_error {
    using std::logic_error::logic_error;
};

/// N real channels sampled on one uniform time grid, no gaps.
struct MultivariateSeries {
    RealMatrix data;           // channels x samples
    double dt = 1.0;           // sample interval, > 0
    double time_origin = 0.0;  // epoch offset of sample 0, same unit as dt

    Eigen::Index channels() const { return data.rows(); }
    Eigen::Index samples() const { return data.cols(); }
    double time_at(Eigen::Index i) const { return time_origin + dt * static_cast<double>(i); }
    double duration() const { return dt * static_cast<double>(samples()); }
};

/// N complex channels; spectrum vanishes at strictly negative frequencies.
struct AnalyticSignal {
    ComplexMatrix data;  // channels x samples
    double dt = 1.0;
    double time_origin = 0.0;
    Eigen::VectorXd removed_means;  // per-channel means subtracted before projection

    Eigen::Index channels() const { return data.rows(); }
    Eigen::Index samples() const { return data.cols(); }
    double time_at(Eigen::Index i) const { return time_origin + dt * static_cast<double>(i); }
};

}  // namespace mvridge
