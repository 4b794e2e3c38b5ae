#pragma once

#include <string>
#include <vector>

#include "mvridge/fft.hpp"
#include "mvridge/grid.hpp"
#include "mvridge/morse.hpp"
#include "mvridge/types.hpp"

namespace mvridge {

/// Analytic wavelet transform of an N-channel series over a scale grid,
/// with optional exact time-derivative planes.
struct TransformCube {
    std::vector<ComplexMatrix> w;    // per channel, scales x time
    std::vector<ComplexMatrix> wt;   // d/dt planes, empty unless requested
    std::vector<ComplexMatrix> wtt;  // d2/dt2 planes, empty unless requested
    ScaleGrid grid;
    MorseWavelet wavelet;
    double dt = 1.0;
    double time_origin = 0.0;
    Eigen::VectorXi edge_width;  // per scale: samples at each end inside two wavelet half-widths
    std::vector<std::string> warnings;

    Eigen::Index channels() const { return static_cast<Eigen::Index>(w.size()); }
    Eigen::Index levels() const { return grid.levels(); }
    Eigen::Index samples() const { return w.empty() ? 0 : w.front().cols(); }
    bool has_wt() const { return !wt.empty(); }
    bool has_wtt() const { return !wtt.empty(); }

    /// Squared transform-vector norm summed over channels, scales x time.
    RealMatrix norm_squared() const {
        RealMatrix m = RealMatrix::Zero(levels(), samples());
        for (const auto& plane : w) m += plane.cwiseAbs2();
        return m;
    }
};

/// FFT-based transform: per scale, multiply the positive-frequency spectrum of
/// each channel by Psi(s*omega) and invert; derivative planes pick up extra
/// (i*omega)^k factors.  The 1/s bandpass normalization is built into Psi(s*omega),
/// so a sinusoid of amplitude a at a grid frequency transforms to modulus a at
/// its matched scale.
inline TransformCube wavelet_transform(const MultivariateSeries& x, const MorseWavelet& wav,
                                       const ScaleGrid& grid, int derivatives = 0) {
    if (derivatives < 0 || derivatives > 2)
        throw std::invalid_argument("wavelet_transform: derivatives must be 0, 1, or 2");
    if (!(wav.beta > 2.0))
        throw std::invalid_argument("wavelet_transform: beta must exceed 2 (time decay too slow otherwise)");
    const Eigen::Index n = x.channels();
    const Eigen::Index t = x.samples();
    if (n < 1 || t < 4) throw invalid_input("wavelet_transform: empty or too-short series");
    if (!x.data.allFinite()) throw numeric_error("wavelet_transform: non-finite samples");
    const double nyquist = detail::kPi / x.dt;
    if (!(grid.frequencies[0] < nyquist))
        throw numeric_error("wavelet_transform: grid exceeds the Nyquist frequency");

    const Eigen::Index s_count = grid.levels();
    TransformCube cube;
    cube.grid = grid;
    cube.wavelet = wav;
    cube.dt = x.dt;
    cube.time_origin = x.time_origin;
    cube.w.assign(n, ComplexMatrix(s_count, t));
    if (derivatives >= 1) cube.wt.assign(n, ComplexMatrix(s_count, t));
    if (derivatives >= 2) cube.wtt.assign(n, ComplexMatrix(s_count, t));

    const double p_dur = wav.duration();
    cube.edge_width.resize(s_count);
    for (Eigen::Index j = 0; j < s_count; ++j) {
        const double half_width = p_dur / grid.frequencies[j];  // time units
        cube.edge_width[j] = static_cast<int>(
            std::min<double>(static_cast<double>(t), std::ceil(2.0 * half_width / x.dt)));
    }

    const double rec_len = 4.0 * p_dur / (grid.frequencies[s_count - 1] * x.dt);
    if (static_cast<double>(t) < rec_len)
        cube.warnings.push_back("record shorter than four wavelet half-widths at the lowest frequency");

    // positive-frequency bins only; Psi is zero at DC and at negative frequencies
    const Eigen::Index k_max = t / 2;
    Eigen::VectorXd omega(k_max + 1);
    for (Eigen::Index k = 0; k <= k_max; ++k) omega[k] = detail::bin_frequency(k, t, x.dt);

    Eigen::FFT<double> fft;
    Eigen::VectorXd centered(t);
    Eigen::VectorXcd spec(t), band(t);
    for (Eigen::Index c = 0; c < n; ++c) {
        centered = x.data.row(c).transpose().array() - x.data.row(c).mean();
        fft.fwd(spec.data(), centered.data(), t);
        for (Eigen::Index j = 0; j < s_count; ++j) {
            const double s = grid.scales[j];
            band.setZero();
            for (Eigen::Index k = 1; k <= k_max; ++k) band[k] = wav.evaluate(s * omega[k]) * spec[k];
            fft.inv(cube.w[c].row(j).data(), band.data(), t);
            if (derivatives >= 1) {
                for (Eigen::Index k = 1; k <= k_max; ++k) band[k] *= Complex{0.0, omega[k]};
                fft.inv(cube.wt[c].row(j).data(), band.data(), t);
            }
            if (derivatives >= 2) {
                for (Eigen::Index k = 1; k <= k_max; ++k) band[k] *= Complex{0.0, omega[k]};
                fft.inv(cube.wtt[c].row(j).data(), band.data(), t);
            }
        }
    }
    return cube;
}

/// Joint transform frequency Im{w^H dw/dt} / ||w||^2 per (scale, time) cell.
/// Cells whose transform norm falls below floor_rel times the global maximum
/// are marked NaN.
inline RealMatrix transform_frequency(const TransformCube& cube, double floor_rel = 1e-8) {
    if (!cube.has_wt()) throw missing_derivative("transform_frequency: cube lacks the d/dt plane");
    const Eigen::Index s_count = cube.levels();
    const Eigen::Index t = cube.samples();
    RealMatrix num = RealMatrix::Zero(s_count, t);
    RealMatrix den = RealMatrix::Zero(s_count, t);
    for (Eigen::Index c = 0; c < cube.channels(); ++c) {
        num += (cube.w[c].conjugate().cwiseProduct(cube.wt[c])).imag();
        den += cube.w[c].cwiseAbs2();
    }
    const double floor = floor_rel * floor_rel * den.maxCoeff();
    RealMatrix out(s_count, t);
    for (Eigen::Index j = 0; j < s_count; ++j)
        for (Eigen::Index i = 0; i < t; ++i)
            out(j, i) = (den(j, i) > floor) ? num(j, i) / den(j, i)
                                            : std::numeric_limits<double>::quiet_NaN();
    return out;
}

/// Second deviation field of the transform, per channel:
///   w2 = d2w/dt2 - 2i*Omega*dw/dt - Omega^2 * w.
/// Zero where the transform frequency is undefined.
inline std::vector<ComplexMatrix> transform_curvature(const TransformCube& cube, double floor_rel = 1e-8) {
    if (!cube.has_wt() || !cube.has_wtt())
        throw missing_derivative("transform_curvature: cube lacks derivative planes");
    const RealMatrix omega = transform_frequency(cube, floor_rel);
    const Eigen::Index s_count = cube.levels();
    const Eigen::Index t = cube.samples();
    std::vector<ComplexMatrix> out(cube.channels(), ComplexMatrix::Zero(s_count, t));
    for (Eigen::Index c = 0; c < cube.channels(); ++c) {
        for (Eigen::Index j = 0; j < s_count; ++j) {
            for (Eigen::Index i = 0; i < t; ++i) {
                const double om = omega(j, i);
                if (!std::isfinite(om)) continue;
                out[c](j, i) = cube.wtt[c](j, i) - Complex{0.0, 2.0 * om} * cube.wt[c](j, i)
                               - om * om * cube.w[c](j, i);
            }
        }
    }
    return out;
}

}  // namespace mvridge
