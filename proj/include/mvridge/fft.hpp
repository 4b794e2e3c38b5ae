#pragma once

#include <unsupported/Eigen/FFT>

#include <numbers>

#include "mvridge/types.hpp"

namespace mvridge::detail {

inline constexpr double kPi    = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Signed radian frequency of DFT bin k on a length-n grid with spacing dt.
/// Bins above n/2 carry negative frequencies.
inline double bin_frequency(Eigen::Index k, Eigen::Index n, double dt) {
    const double f = kTwoPi * static_cast<double>(k) / (static_cast<double>(n) * dt);
    return (2 * k <= n) ? f : f - kTwoPi / dt;
}

inline Eigen::VectorXcd fft_forward(const Eigen::VectorXcd& x) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd out(x.size());
    fft.fwd(out.data(), x.data(), x.size());
    return out;
}

inline Eigen::VectorXcd fft_forward(const Eigen::VectorXd& x) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd out(x.size());
    fft.fwd(out.data(), x.data(), x.size());
    return out;
}

/// Inverse DFT with 1/n scaling.
inline Eigen::VectorXcd fft_inverse(const Eigen::VectorXcd& x) {
    Eigen::FFT<double> fft;
    Eigen::VectorXcd out(x.size());
    fft.inv(out.data(), x.data(), x.size());
    return out;
}

/// Time derivative of a sampled complex series via its periodic extension.
/// Exact when the samples cover one period of a band-limited function.
inline Eigen::VectorXcd spectral_diff_periodic(const Eigen::VectorXcd& f, double dt) {
    const Eigen::Index n = f.size();
    Eigen::VectorXcd spec = fft_forward(f);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (2 * k == n) {
            spec[k] = Complex{0.0, 0.0};  // Nyquist has no well-defined first derivative
        } else {
            spec[k] *= Complex{0.0, bin_frequency(k, n, dt)};
        }
    }
    return fft_inverse(spec);
}

inline Eigen::VectorXd spectral_diff_periodic(const Eigen::VectorXd& f, double dt) {
    return spectral_diff_periodic(Eigen::VectorXcd(f.cast<Complex>()), dt).real();
}

/// Spectral derivative with a linear trend removed first and its slope
/// re-added.  The slope is either zero (series already one period of a
/// periodic function) or the endpoint-matched slope (ramp-like series, e.g. a
/// chirp's frequency track); whichever leaves the smaller kink at the periodic
/// wrap wins, so both families differentiate without ringing.
inline Eigen::VectorXd spectral_diff_detrended(const Eigen::VectorXd& f, double dt) {
    const Eigen::Index n = f.size();
    if (n < 3) return Eigen::VectorXd::Zero(n);
    const double endpoint = (f[n - 1] - f[0]) / static_cast<double>(n - 1);
    const double kink_periodic = std::abs((f[0] - f[n - 1]) - (f[1] - f[0]));
    const double kink_endpoint = std::abs(f[1] - f[0] - endpoint);
    const double slope = (kink_periodic <= kink_endpoint) ? 0.0 : endpoint / dt;
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = f[i] - slope * dt * static_cast<double>(i);
    Eigen::VectorXd d = spectral_diff_periodic(r, dt);
    d.array() += slope;
    return d;
}

}  // namespace mvridge::detail
