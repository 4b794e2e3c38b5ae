#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mvridge/ellipse.hpp"
#include "mvridge/fft.hpp"
#include "mvridge/types.hpp"

namespace mvridge {

namespace detail {

/// Deterministic gaussian source: mt19937_64 plus explicit Box-Muller, so the
/// same seed yields bit-identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }  // [0, 1)

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

    /// Uniform integer in [lo, hi].
    std::int64_t integer(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform() * static_cast<double>(hi - lo + 1));
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace detail

/// Parameters of a synthetic modulated oscillation with known ground truth.
struct SyntheticSpec {
    enum class Kind {
        pure_oscillation,   // e^{i omega tau} x_o
        phase_signal,       // e^{i phi(tau)} x_o, phi = omega tau + c tau^2/2 + sinusoidal FM
        chirp,              // linear chirp sweeping omega by a total fraction `sweep`
        gaussian_envelope,  // gaussian amplitude envelope on a fixed carrier
        modulated_ellipse,  // bivariate: slowly breathing, rotating ellipse
    };

    Kind kind = Kind::pure_oscillation;
    int channels = 1;
    Eigen::Index samples = 1024;
    double dt = 1.0;
    double omega = 2.0 * detail::kPi * 0.05;  // carrier, radian per unit time

    double chirp_rate = 0.0;  // d(omega)/dt for phase_signal
    double sweep = 0.0;       // total fractional frequency change for chirp
    double fm_depth = 0.0;    // fractional FM excursion for phase_signal
    double fm_rate = 0.0;     // FM modulation frequency, radian per unit time

    double sigma = 0.0;    // gaussian envelope width, time units
    double center = -1.0;  // envelope center time (< 0 means record middle)

    std::vector<Complex> coefficients;  // per-channel x_o; defaults to unit amplitudes
                                        // with successive quarter-cycle lags

    // modulated_ellipse tracks
    double ell_a = 1.0;           // mean semi-major
    double ell_b = 0.5;           // mean semi-minor
    double ell_breathe = 0.0;     // fractional slow modulation of both axes
    double ell_theta_rate = 0.0;  // orientation precession rate, radian per unit time

    double noise_sigma = 0.0;  // white gaussian noise per channel
    std::uint64_t seed = 0;
};

/// Closed-form ground truth accompanying a generated signal.
struct SyntheticTruth {
    ComplexMatrix x_plus;       // noiseless analytic signal, channels x samples
    Eigen::VectorXd omega;      // joint instantaneous frequency
    Eigen::VectorXd upsilon;    // joint bandwidth
    Eigen::VectorXd xi;         // joint curvature
    Eigen::VectorXd jerk_norm;  // ||x3||
    bool has_moments = false;
    Eigen::Index window_begin = 0;  // interval over which delta was evaluated
    Eigen::Index window_end = 0;
    double delta = 0.0;  // local stability level over the window
};

struct SyntheticSignal {
    MultivariateSeries observed;
    SyntheticTruth truth;
};

namespace detail {

inline std::vector<Complex> default_coefficients(int channels) {
    std::vector<Complex> c(static_cast<std::size_t>(channels));
    for (int k = 0; k < channels; ++k)
        c[static_cast<std::size_t>(k)] = std::exp(Complex{0.0, -kPi / 2.0 * static_cast<double>(k)});
    return c;
}

inline double stability_from_truth(SyntheticTruth& truth) {
    double delta = 0.0;
    for (Eigen::Index i = truth.window_begin; i < truth.window_end; ++i) {
        const double om = std::abs(truth.omega[i]);
        if (!(om > 0.0)) continue;
        double nrm = 0.0;
        for (Eigen::Index c = 0; c < truth.x_plus.rows(); ++c) nrm += std::norm(truth.x_plus(c, i));
        nrm = std::sqrt(nrm);
        delta = std::max(delta, truth.upsilon[i] / om);
        delta = std::max(delta, std::sqrt(truth.xi[i] / (om * om)));
        if (nrm > 0.0)
            delta = std::max(delta, std::cbrt(truth.jerk_norm[i] / (nrm * om * om * om)));
    }
    return delta;
}

}  // namespace detail

/// Generate the observed series Re{x_plus} + white gaussian noise together with
/// the closed-form truth record.
inline SyntheticSignal generate(const SyntheticSpec& spec) {
    using Kind = SyntheticSpec::Kind;
    const Eigen::Index t_count = spec.samples;
    const int n = (spec.kind == Kind::modulated_ellipse) ? 2 : spec.channels;
    if (t_count < 2 || n < 1) throw invalid_input("generate: empty spec");
    if (!std::isfinite(spec.omega) || !std::isfinite(spec.noise_sigma) || spec.noise_sigma < 0.0)
        throw invalid_input("generate: non-finite parameters");

    std::vector<Complex> coeff =
        spec.coefficients.empty() ? detail::default_coefficients(n) : spec.coefficients;
    if (static_cast<int>(coeff.size()) != n) throw invalid_input("generate: coefficient count mismatch");

    SyntheticSignal out;
    SyntheticTruth& truth = out.truth;
    truth.x_plus.resize(n, t_count);
    truth.omega.resize(t_count);
    truth.upsilon.setZero(t_count);
    truth.xi.setZero(t_count);
    truth.jerk_norm.setZero(t_count);
    truth.window_begin = 0;
    truth.window_end = t_count;
    truth.has_moments = true;

    const double duration = spec.dt * static_cast<double>(t_count);
    double coeff_norm = 0.0;
    for (const Complex& c : coeff) coeff_norm += std::norm(c);
    coeff_norm = std::sqrt(coeff_norm);

    switch (spec.kind) {
        case Kind::pure_oscillation: {
            for (Eigen::Index i = 0; i < t_count; ++i) {
                const double tau = spec.dt * static_cast<double>(i);
                const Complex rot = std::exp(Complex{0.0, spec.omega * tau});
                for (int c = 0; c < n; ++c) truth.x_plus(c, i) = rot * coeff[static_cast<std::size_t>(c)];
                truth.omega[i] = spec.omega;
            }
            break;
        }
        case Kind::phase_signal:
        case Kind::chirp: {
            const double c_rate = (spec.kind == Kind::chirp)
                                      ? spec.omega * spec.sweep / duration
                                      : spec.chirp_rate;
            const double t_mid = 0.5 * duration;
            for (Eigen::Index i = 0; i < t_count; ++i) {
                const double tau = spec.dt * static_cast<double>(i) - t_mid;  // center the sweep
                double phi = spec.omega * tau + 0.5 * c_rate * tau * tau;
                double om = spec.omega + c_rate * tau;
                double phi2 = c_rate;
                double phi3 = 0.0;
                if (spec.fm_depth != 0.0 && spec.fm_rate != 0.0) {
                    phi += -(spec.fm_depth * spec.omega / spec.fm_rate) * std::cos(spec.fm_rate * tau);
                    om += spec.fm_depth * spec.omega * std::sin(spec.fm_rate * tau);
                    phi2 += spec.fm_depth * spec.omega * spec.fm_rate * std::cos(spec.fm_rate * tau);
                    phi3 += -spec.fm_depth * spec.omega * spec.fm_rate * spec.fm_rate *
                            std::sin(spec.fm_rate * tau);
                }
                const Complex rot = std::exp(Complex{0.0, phi});
                for (int c = 0; c < n; ++c) truth.x_plus(c, i) = rot * coeff[static_cast<std::size_t>(c)];
                truth.omega[i] = om;
                truth.xi[i] = std::abs(phi2);
                truth.jerk_norm[i] = std::abs(phi3) * coeff_norm;
            }
            break;
        }
        case Kind::gaussian_envelope: {
            if (!(spec.sigma > 0.0)) throw invalid_input("generate: gaussian envelope needs sigma > 0");
            const double t_c = (spec.center >= 0.0) ? spec.center : 0.5 * duration;
            const double c_rate = spec.chirp_rate;  // optional linear sweep under the envelope
            for (Eigen::Index i = 0; i < t_count; ++i) {
                const double tau = spec.dt * static_cast<double>(i);
                const double u = tau - t_c;
                const double s2 = spec.sigma * spec.sigma;
                const double a = std::exp(-u * u / (2.0 * s2));
                const Complex rot =
                    a * std::exp(Complex{0.0, spec.omega * tau + 0.5 * c_rate * u * u});
                for (int c = 0; c < n; ++c) truth.x_plus(c, i) = rot * coeff[static_cast<std::size_t>(c)];
                const double da = -u / s2;                    // a'/a
                const double dda = (u * u - s2) / (s2 * s2);  // a''/a
                const double ddda = u * (3.0 * s2 - u * u) / (s2 * s2 * s2);  // a'''/a
                truth.omega[i] = spec.omega + c_rate * u;
                truth.upsilon[i] = std::abs(da);
                truth.xi[i] = std::hypot(dda, c_rate);
                truth.jerk_norm[i] = std::hypot(ddda, 3.0 * da * c_rate) * a * coeff_norm;
            }
            // stability is meaningful within one envelope width of the center
            truth.window_begin = std::max<Eigen::Index>(
                0, static_cast<Eigen::Index>(std::floor((t_c - spec.sigma) / spec.dt)));
            truth.window_end = std::min<Eigen::Index>(
                t_count, static_cast<Eigen::Index>(std::ceil((t_c + spec.sigma) / spec.dt)) + 1);
            break;
        }
        case Kind::modulated_ellipse: {
            const double t_mid = 0.5 * duration;
            truth.has_moments = false;
            for (Eigen::Index i = 0; i < t_count; ++i) {
                const double tau = spec.dt * static_cast<double>(i);
                const double mod = 1.0 + spec.ell_breathe * std::sin(detail::kTwoPi * tau / duration);
                EllipseParams e;
                e.a = spec.ell_a * mod;
                e.b = spec.ell_b * mod;
                e.theta = spec.ell_theta_rate * tau;
                const double u = tau - t_mid;
                e.phi = spec.omega * u + 0.5 * spec.chirp_rate * u * u;
                const auto [xp, yp] = ellipse_signal(e);
                truth.x_plus(0, i) = xp;
                truth.x_plus(1, i) = yp;
                truth.omega[i] = spec.omega + spec.chirp_rate * u;
            }
            break;
        }
    }

    if (truth.has_moments) truth.delta = detail::stability_from_truth(truth);

    out.observed.dt = spec.dt;
    out.observed.time_origin = 0.0;
    out.observed.data = truth.x_plus.real();
    if (spec.noise_sigma > 0.0) {
        detail::Rng rng(spec.seed);
        for (Eigen::Index c = 0; c < n; ++c)
            for (Eigen::Index i = 0; i < t_count; ++i)
                out.observed.data(c, i) += spec.noise_sigma * rng.gaussian();
    }
    return out;
}

/// Random multicomponent signal: per channel, a sum of sinusoids at exact DFT
/// frequencies (hence exactly periodic on the record) plus one dominant carrier
/// that keeps every channel bounded away from zero amplitude.  carrier_boost
/// sets the carrier amplitude as a multiple of the other components' total.
inline MultivariateSeries random_multicomponent(std::uint64_t seed, int channels, Eigen::Index samples,
                                                double dt, int components, Eigen::Index k_min,
                                                Eigen::Index k_max, double carrier_boost = 2.0) {
    detail::Rng rng(seed);
    MultivariateSeries out;
    out.dt = dt;
    out.data.setZero(channels, samples);
    for (int c = 0; c < channels; ++c) {
        double amp_sum = 0.0;
        std::vector<double> amp(static_cast<std::size_t>(components)),
            phase(static_cast<std::size_t>(components));
        std::vector<Eigen::Index> bin(static_cast<std::size_t>(components));
        for (int j = 0; j < components; ++j) {
            bin[static_cast<std::size_t>(j)] = rng.integer(k_min, k_max);
            amp[static_cast<std::size_t>(j)] = 0.5 + 0.5 * rng.uniform();
            phase[static_cast<std::size_t>(j)] = detail::kTwoPi * rng.uniform();
            amp_sum += amp[static_cast<std::size_t>(j)];
        }
        const Eigen::Index carrier_bin = rng.integer(k_min, k_max);
        const double carrier_amp = carrier_boost * amp_sum;
        const double carrier_phase = detail::kTwoPi * rng.uniform();
        for (Eigen::Index i = 0; i < samples; ++i) {
            const double base = detail::kTwoPi * static_cast<double>(i) / static_cast<double>(samples);
            double v = carrier_amp * std::cos(base * static_cast<double>(carrier_bin) + carrier_phase);
            for (int j = 0; j < components; ++j)
                v += amp[static_cast<std::size_t>(j)] *
                     std::cos(base * static_cast<double>(bin[static_cast<std::size_t>(j)]) +
                              phase[static_cast<std::size_t>(j)]);
            out.data(c, i) = v;
        }
    }
    return out;
}

/// Synthetic analog of a freely drifting float record: an integrated red-noise
/// background plus a modulated elliptical oscillation whose frequency decreases
/// by an order of magnitude over the record.
inline MultivariateSeries float_like_trajectory(std::uint64_t seed, Eigen::Index samples = 10000,
                                                double dt = 1.0, double oscillation_amplitude = 14.0) {
    detail::Rng rng(seed);
    const double duration = dt * static_cast<double>(samples);
    const double omega_hi = detail::kTwoPi * 0.12;  // cycles per unit time at the start
    const double decay = std::log(10.0) / duration;

    MultivariateSeries out;
    out.dt = dt;
    out.data.resize(2, samples);

    // background: integrated AR(1) velocity noise, one independent stream per channel
    double vel_x = 0.0, vel_y = 0.0, pos_x = 0.0, pos_y = 0.0;
    const double rho = 0.98;
    const double step_sigma = 0.12 * oscillation_amplitude / 14.0;
    for (Eigen::Index i = 0; i < samples; ++i) {
        const double tau = dt * static_cast<double>(i);
        const double om = omega_hi * std::exp(-decay * tau);
        const double phi = omega_hi * (1.0 - std::exp(-decay * tau)) / decay;
        const double breathe = 1.0 + 0.15 * std::sin(detail::kTwoPi * 1.5 * tau / duration);
        EllipseParams e;
        e.a = oscillation_amplitude * breathe;
        e.b = 0.55 * oscillation_amplitude * breathe;
        e.theta = 0.3 * detail::kTwoPi * tau / duration;
        e.phi = phi;
        const auto [xp, yp] = ellipse_signal(e);
        (void)om;

        vel_x = rho * vel_x + step_sigma * rng.gaussian();
        vel_y = rho * vel_y + step_sigma * rng.gaussian();
        pos_x += vel_x * dt;
        pos_y += vel_y * dt;

        out.data(0, i) = xp.real() + pos_x;
        out.data(1, i) = yp.real() + pos_y;
    }
    return out;
}

}  // namespace mvridge
