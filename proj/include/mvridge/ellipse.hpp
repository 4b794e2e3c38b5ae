#pragma once

#include <cmath>
#include <vector>

#include "mvridge/fft.hpp"
#include "mvridge/types.hpp"

namespace mvridge {

/// Time-varying ellipse parameters of a bivariate analytic pair at one sample.
/// The planar trace is  center + e^{i*theta} (a cos(phi) + i b sin(phi))
/// read as (x, y) = (Re, Im).
struct EllipseSnapshot {
    Eigen::Index t = 0;
    Eigen::Vector2d center{0.0, 0.0};
    double semi_major = 0.0;  // a >= 0
    double semi_minor = 0.0;  // signed b, |b| <= a; sign gives the rotation sense
    double orientation = 0.0; // theta in (-pi/2, pi/2]
    double phase = 0.0;       // phi in (-pi, pi]
};

struct EllipseParams {
    double a = 0.0, b = 0.0, theta = 0.0, phi = 0.0;
};

namespace detail {

inline double wrap_pi(double x) {
    x = std::fmod(x + kPi, kTwoPi);
    if (x <= 0.0) x += kTwoPi;
    return x - kPi;  // (-pi, pi]
}

}  // namespace detail

/// Ellipse parameters of one bivariate analytic sample via its rotary
/// components p = (x+iy)/2 and n = (x-iy)/2:
///   a = |p|+|n|,  b = |p|-|n|,  theta = (arg p - arg n)/2,  phi = (arg p + arg n)/2.
/// The (theta, phi) <-> (theta -/+ pi, phi +/- pi) ambiguity is resolved by
/// confining theta to (-pi/2, pi/2].  Both rotary magnitudes zero yields the
/// degenerate all-zero ellipse.
inline EllipseParams ellipse_params(Complex x_plus, Complex y_plus) {
    const Complex p = 0.5 * (x_plus + Complex{0.0, 1.0} * y_plus);
    const Complex n = 0.5 * (x_plus - Complex{0.0, 1.0} * y_plus);
    const double mp = std::abs(p);
    const double mn = std::abs(n);
    if (mp == 0.0 && mn == 0.0) return {};
    const double arg_p = (mp == 0.0) ? 0.0 : std::arg(p);
    const double arg_n = (mn == 0.0) ? 0.0 : std::arg(n);
    EllipseParams e;
    e.a = mp + mn;
    e.b = mp - mn;
    double theta = detail::wrap_pi((arg_p - arg_n) / 2.0);
    double phi = (arg_p + arg_n) / 2.0;
    if (theta > detail::kPi / 2.0) {
        theta -= detail::kPi;
        phi += detail::kPi;
    } else if (theta <= -detail::kPi / 2.0) {
        theta += detail::kPi;
        phi -= detail::kPi;
    }
    e.theta = theta;
    e.phi = detail::wrap_pi(phi);
    return e;
}

/// Inverse of ellipse_params: the analytic pair whose parameters these are.
inline std::pair<Complex, Complex> ellipse_signal(const EllipseParams& e) {
    const Complex p = 0.5 * (e.a + e.b) * std::exp(Complex{0.0, e.phi + e.theta});
    const Complex n = 0.5 * (e.a - e.b) * std::exp(Complex{0.0, e.phi - e.theta});
    return {p + n, Complex{0.0, -1.0} * (p - n)};
}

/// Parametric outline samples, 2 x n_points, optionally magnified about the center.
inline RealMatrix ellipse_outline(const EllipseSnapshot& s, int n_points, double magnification = 1.0) {
    if (n_points < 8) throw std::invalid_argument("ellipse_outline: need at least 8 points");
    RealMatrix out(2, n_points);
    const Complex rot = std::exp(Complex{0.0, s.orientation});
    for (int k = 0; k < n_points; ++k) {
        const double lam = detail::kTwoPi * static_cast<double>(k) / static_cast<double>(n_points);
        const Complex z = rot * Complex{s.semi_major * std::cos(lam), s.semi_minor * std::sin(lam)};
        out(0, k) = s.center[0] + magnification * z.real();
        out(1, k) = s.center[1] + magnification * z.imag();
    }
    return out;
}

/// Sample indices spaced by one estimated instantaneous period, accumulated
/// along the ridge: a snapshot fires each time the integrated phase gains 2*pi.
/// Non-finite or non-positive frequencies are skipped.
inline std::vector<Eigen::Index> snapshot_times(const Eigen::VectorXd& freq_estimate, double dt) {
    std::vector<Eigen::Index> out;
    double acc = 0.0;
    bool started = false;
    for (Eigen::Index i = 0; i < freq_estimate.size(); ++i) {
        const double f = freq_estimate[i];
        if (!std::isfinite(f) || !(f > 0.0)) continue;
        if (!started) {
            out.push_back(i);
            started = true;
            continue;
        }
        acc += f * dt;
        if (acc >= detail::kTwoPi) {
            out.push_back(i);
            acc = std::fmod(acc, detail::kTwoPi);
        }
    }
    return out;
}

}  // namespace mvridge
