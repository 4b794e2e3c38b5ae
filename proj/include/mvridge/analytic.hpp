#pragma once

#include <stdexcept>
#include <utility>

#include "mvridge/fft.hpp"
#include "mvridge/types.hpp"

namespace mvridge {

/// Analytic part of each channel: channel means are removed, negative-frequency
/// DFT bins zeroed, strictly positive bins doubled.  DC stays at its
/// (mean-removed, hence ~0) value and the Nyquist bin is kept at 1x, which makes
/// Re{output} reproduce the mean-removed input exactly.  Boundary handling is
/// the periodic semantics of the DFT.
inline AnalyticSignal analytic_signal(const MultivariateSeries& x) {
    const Eigen::Index n = x.channels();
    const Eigen::Index t = x.samples();
    if (n < 1 || t < 2) throw invalid_input("analytic_signal: empty series");
    if (!x.data.allFinite()) throw numeric_error("analytic_signal: non-finite samples");
    if (!(x.dt > 0.0)) throw invalid_input("analytic_signal: sample interval must be positive");

    AnalyticSignal out;
    out.dt = x.dt;
    out.time_origin = x.time_origin;
    out.data.resize(n, t);
    out.removed_means.resize(n);

    Eigen::FFT<double> fft;
    Eigen::VectorXd centered(t);
    Eigen::VectorXcd spec(t);
    for (Eigen::Index c = 0; c < n; ++c) {
        const double mean = x.data.row(c).mean();
        out.removed_means[c] = mean;
        centered = x.data.row(c).transpose().array() - mean;
        fft.fwd(spec.data(), centered.data(), t);
        for (Eigen::Index k = 1; 2 * k < t; ++k) spec[k] *= 2.0;
        for (Eigen::Index k = t / 2 + 1; k < t; ++k) spec[k] = Complex{0.0, 0.0};
        fft.inv(out.data.row(c).data(), spec.data(), t);
    }
    return out;
}

/// Exact time derivative of each channel via multiplication by (i*omega)^order
/// in the frequency domain.  order must be 1, 2, or 3.
inline AnalyticSignal spectral_derivative(const AnalyticSignal& z, int order) {
    if (order < 1 || order > 3) throw std::invalid_argument("spectral_derivative: unsupported order");
    const Eigen::Index n = z.channels();
    const Eigen::Index t = z.samples();
    if (n < 1 || t < 2) throw invalid_input("spectral_derivative: empty signal");

    AnalyticSignal out;
    out.dt = z.dt;
    out.time_origin = z.time_origin;
    out.removed_means = Eigen::VectorXd::Zero(n);
    out.data.resize(n, t);

    Eigen::VectorXcd factor(t);
    for (Eigen::Index k = 0; k < t; ++k) {
        if (2 * k == t && (order % 2) != 0) {
            factor[k] = Complex{0.0, 0.0};  // odd derivative undefined at Nyquist
        } else {
            factor[k] = std::pow(Complex{0.0, detail::bin_frequency(k, t, z.dt)}, order);
        }
    }

    Eigen::FFT<double> fft;
    Eigen::VectorXcd spec(t);
    for (Eigen::Index c = 0; c < n; ++c) {
        fft.fwd(spec.data(), z.data.row(c).data(), t);
        spec.array() *= factor.array();
        fft.inv(out.data.row(c).data(), spec.data(), t);
    }
    return out;
}

struct PolarDecomposition {
    RealMatrix amplitudes;  // >= 0
    RealMatrix phases;      // in (-pi, pi]; 0 where amplitude is 0
};

inline PolarDecomposition polar_decompose(const AnalyticSignal& z) {
    PolarDecomposition out;
    out.amplitudes.resize(z.channels(), z.samples());
    out.phases.resize(z.channels(), z.samples());
    for (Eigen::Index c = 0; c < z.channels(); ++c) {
        for (Eigen::Index i = 0; i < z.samples(); ++i) {
            const Complex v = z.data(c, i);
            const double a = std::abs(v);
            out.amplitudes(c, i) = a;
            double p = (a == 0.0) ? 0.0 : std::arg(v);
            if (p <= -detail::kPi) p += detail::kTwoPi;
            out.phases(c, i) = p;
        }
    }
    return out;
}

/// Reflect each channel about its endpoints by `pad` samples on both sides
/// (the endpoint samples are not duplicated).  Used to soften the periodic
/// wraparound of FFT-based transforms.
inline MultivariateSeries mirror_pad(const MultivariateSeries& x, Eigen::Index pad) {
    const Eigen::Index t = x.samples();
    if (pad < 0 || pad > t - 1) throw std::invalid_argument("mirror_pad: pad must be in [0, samples-1]");
    MultivariateSeries out;
    out.dt = x.dt;
    out.time_origin = x.time_origin - x.dt * static_cast<double>(pad);
    out.data.resize(x.channels(), t + 2 * pad);
    for (Eigen::Index c = 0; c < x.channels(); ++c) {
        for (Eigen::Index i = 0; i < pad; ++i) out.data(c, i) = x.data(c, pad - i);
        out.data.row(c).segment(pad, t) = x.data.row(c);
        for (Eigen::Index i = 0; i < pad; ++i) out.data(c, pad + t + i) = x.data(c, t - 2 - i);
    }
    return out;
}

}  // namespace mvridge
