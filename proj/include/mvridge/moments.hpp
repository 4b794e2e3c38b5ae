#pragma once

#include <cmath>
#include <limits>

#include "mvridge/analytic.hpp"
#include "mvridge/fft.hpp"
#include "mvridge/types.hpp"

namespace mvridge {

namespace detail {

/// Samples with ||x_plus|| below this fraction of its maximum are excluded
/// from ratio quantities (division guard; the theory assumes a nonvanishing signal).
inline constexpr double kAmplitudeFloorRel = 1e-8;

/// Normalized deviation ratios below this are indistinguishable from the FFT
/// round-off floor (eps amplified by sqrt(T) and Nyquist powers) and are
/// treated as exactly zero; matters for the cube-rooted jerk term.
inline constexpr double kStabilityNoiseFloor = 1e-11;

inline void require_same_shape(const AnalyticSignal& a, const AnalyticSignal& b, const char* what) {
    if (a.channels() != b.channels() || a.samples() != b.samples())
        throw invalid_input(std::string(what) + ": shape mismatch");
}

/// Bridge NaN gaps with the nearest valid value so the series can go through
/// an FFT.
inline Eigen::VectorXd fill_invalid(Eigen::VectorXd v) {
    double last = 0.0;
    bool seen = false;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::isfinite(v[i])) { last = v[i]; seen = true; }
        else if (seen) v[i] = last;
    }
    for (Eigen::Index i = v.size(); i-- > 0;) {
        if (std::isfinite(v[i])) last = v[i];
        else v[i] = last;
    }
    return v;
}

}  // namespace detail

/// Intrinsic deviation vectors of an analytic signal and the scalar moments
/// derived from them.  Samples below the amplitude floor carry NaN in the
/// ratio quantities.
struct DeviationSet {
    ComplexMatrix x1, x2, x3;   // deviation vectors, channels x samples
    Eigen::VectorXd omega;      // joint instantaneous frequency
    Eigen::VectorXd omega_dot;  // joint chirp rate
    Eigen::VectorXd upsilon;    // joint instantaneous bandwidth, >= 0
    Eigen::VectorXd xi;         // joint instantaneous curvature, >= 0
    Eigen::VectorXd norm;       // ||x_plus(t)||
    Eigen::VectorXd jerk_norm;  // ||x3(t)||, proxy for the remainder magnitude

    Eigen::Index samples() const { return omega.size(); }
    bool valid(Eigen::Index i) const { return std::isfinite(omega[i]); }
};

/// Power-weighted average of the channel instantaneous frequencies:
/// Im{x_plus^H x_plus'} / ||x_plus||^2.  z1 must be the first spectral derivative of z.
inline Eigen::VectorXd joint_frequency(const AnalyticSignal& z, const AnalyticSignal& z1) {
    detail::require_same_shape(z, z1, "joint_frequency");
    const Eigen::Index t = z.samples();
    Eigen::VectorXd num = Eigen::VectorXd::Zero(t);
    Eigen::VectorXd den = Eigen::VectorXd::Zero(t);
    for (Eigen::Index c = 0; c < z.channels(); ++c) {
        num += (z.data.row(c).conjugate().cwiseProduct(z1.data.row(c))).imag().transpose();
        den += z.data.row(c).cwiseAbs2().transpose();
    }
    const double floor = detail::kAmplitudeFloorRel * detail::kAmplitudeFloorRel * den.maxCoeff();
    Eigen::VectorXd out(t);
    for (Eigen::Index i = 0; i < t; ++i)
        out[i] = (den[i] > floor) ? num[i] / den[i] : std::numeric_limits<double>::quiet_NaN();
    return out;
}

/// Normalized error of approximating the signal's evolution as a uniform phase
/// progression at omega_trial:  ||x_plus' - i*omega_trial*x_plus||^2 / ||x_plus||^2.
/// Minimized over omega_trial at the joint instantaneous frequency.
inline Eigen::VectorXd frequency_error_curve(const AnalyticSignal& z, const AnalyticSignal& z1,
                                             double omega_trial) {
    detail::require_same_shape(z, z1, "frequency_error_curve");
    const Eigen::Index t = z.samples();
    Eigen::VectorXd num = Eigen::VectorXd::Zero(t);
    Eigen::VectorXd den = Eigen::VectorXd::Zero(t);
    const Complex rot{0.0, omega_trial};
    for (Eigen::Index c = 0; c < z.channels(); ++c) {
        num += (z1.data.row(c) - rot * z.data.row(c)).cwiseAbs2().transpose();
        den += z.data.row(c).cwiseAbs2().transpose();
    }
    const double floor = detail::kAmplitudeFloorRel * detail::kAmplitudeFloorRel * den.maxCoeff();
    Eigen::VectorXd out(t);
    for (Eigen::Index i = 0; i < t; ++i)
        out[i] = (den[i] > floor) ? num[i] / den[i] : std::numeric_limits<double>::quiet_NaN();
    return out;
}

/// Deviation vectors x1..x3 (the signal demodulated at the joint frequency,
/// differentiated p times, at zero offset) together with the scalar moments.
/// z1..z3 must be the spectral derivatives of z of orders 1..3.
/// The chirp rate is the spectral derivative of the omega series with its
/// endpoint-matched linear trend handled exactly (linear chirps do not ring).
inline DeviationSet deviation_vectors(const AnalyticSignal& z, const AnalyticSignal& z1,
                                      const AnalyticSignal& z2, const AnalyticSignal& z3) {
    detail::require_same_shape(z, z1, "deviation_vectors");
    detail::require_same_shape(z, z2, "deviation_vectors");
    detail::require_same_shape(z, z3, "deviation_vectors");
    const Eigen::Index n = z.channels();
    const Eigen::Index t = z.samples();

    DeviationSet d;
    d.omega = joint_frequency(z, z1);
    d.x1.resize(n, t);
    d.x2.resize(n, t);
    d.x3.resize(n, t);
    d.norm.resize(t);
    d.upsilon.resize(t);
    d.xi.resize(t);
    d.jerk_norm.resize(t);

    for (Eigen::Index i = 0; i < t; ++i) {
        const double om = d.omega[i];
        const bool ok = std::isfinite(om);
        const Complex iw = ok ? Complex{0.0, om} : Complex{0.0, 0.0};
        double nrm2 = 0.0, n1 = 0.0, n2 = 0.0, n3 = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) {
            const Complex v0 = z.data(c, i), v1 = z1.data(c, i), v2 = z2.data(c, i), v3 = z3.data(c, i);
            const Complex e1 = v1 - iw * v0;
            const Complex e2 = v2 - 2.0 * iw * v1 - om * om * v0;
            const Complex e3 = v3 - 3.0 * iw * v2 - 3.0 * om * om * v1 + iw * om * om * v0;
            d.x1(c, i) = ok ? e1 : Complex{0.0, 0.0};
            d.x2(c, i) = ok ? e2 : Complex{0.0, 0.0};
            d.x3(c, i) = ok ? e3 : Complex{0.0, 0.0};
            nrm2 += std::norm(v0);
            n1 += std::norm(e1);
            n2 += std::norm(e2);
            n3 += std::norm(e3);
        }
        d.norm[i] = std::sqrt(nrm2);
        if (ok) {
            d.upsilon[i] = std::sqrt(n1) / d.norm[i];
            d.xi[i] = std::sqrt(n2) / d.norm[i];
            d.jerk_norm[i] = std::sqrt(n3);
        } else {
            d.upsilon[i] = d.xi[i] = d.jerk_norm[i] = std::numeric_limits<double>::quiet_NaN();
        }
    }

    d.omega_dot = detail::spectral_diff_detrended(detail::fill_invalid(d.omega), z.dt);
    for (Eigen::Index i = 0; i < t; ++i)
        if (!std::isfinite(d.omega[i])) d.omega_dot[i] = std::numeric_limits<double>::quiet_NaN();
    return d;
}

/// Local stability level over a sample interval: the largest of the bandwidth,
/// curvature, and jerk-proxy terms.  delta < 1 classifies the signal as a
/// modulated oscillation.
struct StabilityReport {
    double delta = 0.0;
    double term_bandwidth = 0.0;   // sup |upsilon/omega|
    double term_curvature = 0.0;   // sup sqrt(|xi|/omega^2)
    double term_jerk_proxy = 0.0;  // sup (||x3|| / (||x_plus|| |omega|^3))^(1/3)
    Eigen::Index begin = 0, end = 0;
    bool is_modulated_oscillation() const { return delta < 1.0; }
};

inline StabilityReport stability_level(const DeviationSet& d, Eigen::Index begin, Eigen::Index end) {
    if (begin < 0 || end > d.samples() || begin >= end)
        throw std::invalid_argument("stability_level: interval out of range");
    StabilityReport rep;
    rep.begin = begin;
    rep.end = end;
    bool any = false;
    auto damp = [](double ratio) { return (ratio < detail::kStabilityNoiseFloor) ? 0.0 : ratio; };
    for (Eigen::Index i = begin; i < end; ++i) {
        if (!d.valid(i)) continue;
        const double om = std::abs(d.omega[i]);
        if (om == 0.0) continue;
        any = true;
        rep.term_bandwidth = std::max(rep.term_bandwidth, damp(d.upsilon[i] / om));
        rep.term_curvature = std::max(rep.term_curvature, std::sqrt(damp(d.xi[i] / (om * om))));
        rep.term_jerk_proxy = std::max(
            rep.term_jerk_proxy, std::cbrt(damp(d.jerk_norm[i] / (d.norm[i] * om * om * om))));
    }
    if (!any) throw invalid_input("stability_level: interval contains no valid samples");
    rep.delta = std::max({rep.term_bandwidth, rep.term_curvature, rep.term_jerk_proxy});
    return rep;
}

/// Max residuals of the projection and derivative identities linking the
/// deviation vectors, normalized by the natural scale of each identity
/// (sup of omega^k * ||x_plus||).  All series derivatives here — including the
/// chirp rate on the right of identity (ii) — use the pure periodic spectral
/// rule, so on inputs that are one period of a band-limited function the
/// residuals reach discretization level.
struct IdentityResiduals {
    double parallel_bandwidth = 0.0;  // x^H x1/||x||^2 vs (||x||)'/||x||
    double chirp_projection = 0.0;    // Im{x^H x2}/||x||^2 vs omega'
    double first_derivative = 0.0;    // x1' + i omega' x  vs  x2 + i omega x1
    double second_derivative = 0.0;   // x2' + 2i omega' x1  vs  x3 + i omega x2
};

inline IdentityResiduals projection_identities(const DeviationSet& d, const AnalyticSignal& z,
                                               Eigen::Index trim = 0) {
    const Eigen::Index n = z.channels();
    const Eigen::Index t = z.samples();
    if (d.samples() != t || d.x1.rows() != n)
        throw invalid_input("projection_identities: shape mismatch");

    const Eigen::VectorXd norm_dot = detail::spectral_diff_periodic(d.norm, z.dt);
    const Eigen::VectorXd omega_dot =
        detail::spectral_diff_detrended(detail::fill_invalid(d.omega), z.dt);
    ComplexMatrix x1_dot(n, t), x2_dot(n, t);
    for (Eigen::Index c = 0; c < n; ++c) {
        x1_dot.row(c) = detail::spectral_diff_periodic(Eigen::VectorXcd(d.x1.row(c)), z.dt).transpose();
        x2_dot.row(c) = detail::spectral_diff_periodic(Eigen::VectorXcd(d.x2.row(c)), z.dt).transpose();
    }

    double om_sup = 0.0, scale1 = 0.0, scale2 = 0.0, scale3 = 0.0;
    for (Eigen::Index i = trim; i < t - trim; ++i) {
        if (!d.valid(i)) continue;
        const double om = std::abs(d.omega[i]);
        om_sup = std::max(om_sup, om);
        scale1 = std::max(scale1, om);
        scale2 = std::max(scale2, om * om);
        scale3 = std::max(scale3, om * om * d.norm[i]);
    }
    const double scale4 = scale3 * om_sup;
    IdentityResiduals res;
    if (scale1 == 0.0) return res;

    for (Eigen::Index i = trim; i < t - trim; ++i) {
        if (!d.valid(i)) continue;
        const double om = d.omega[i];
        const Complex iw{0.0, om};
        const Complex iwd{0.0, omega_dot[i]};
        Complex proj1{0.0, 0.0}, proj2{0.0, 0.0};
        double r3 = 0.0, r4 = 0.0;
        for (Eigen::Index c = 0; c < n; ++c) {
            proj1 += std::conj(z.data(c, i)) * d.x1(c, i);
            proj2 += std::conj(z.data(c, i)) * d.x2(c, i);
            r3 += std::norm(x1_dot(c, i) + iwd * z.data(c, i) - d.x2(c, i) - iw * d.x1(c, i));
            r4 += std::norm(x2_dot(c, i) + 2.0 * iwd * d.x1(c, i) - d.x3(c, i) - iw * d.x2(c, i));
        }
        const double nrm2 = d.norm[i] * d.norm[i];
        // identity (i) includes the realness of the projection, so compare in full
        res.parallel_bandwidth =
            std::max(res.parallel_bandwidth,
                     std::abs(proj1 / nrm2 - norm_dot[i] / d.norm[i]) / scale1);
        res.chirp_projection =
            std::max(res.chirp_projection, std::abs(proj2.imag() / nrm2 - omega_dot[i]) / scale2);
        res.first_derivative = std::max(res.first_derivative, std::sqrt(r3) / scale3);
        res.second_derivative = std::max(res.second_derivative, std::sqrt(r4) / scale4);
    }
    return res;
}

}  // namespace mvridge
