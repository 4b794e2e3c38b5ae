#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "mvridge/fft.hpp"
#include "mvridge/types.hpp"

namespace mvridge {

namespace detail {

/// Coefficients (in u = omega^gamma) of the p-th dimensionless derivative
/// omega^p Psi^(p)(omega) / Psi(omega) of a generalized Morse wavelet.
/// Built from ln Psi = const + beta ln(omega) - omega^gamma via the recursion
///   D_{p+1} = omega * D_p' - p * D_p + D_1 * D_p,   D_1 = beta - gamma * u,
/// where omega * d/d(omega) u^k = k * gamma * u^k keeps everything polynomial.
inline std::vector<double> morse_dimensionless_poly(double beta, double gamma, int p) {
    std::vector<double> c = {beta, -gamma};
    for (int q = 1; q < p; ++q) {
        std::vector<double> next(c.size() + 1, 0.0);
        for (std::size_t k = 0; k < c.size(); ++k) {
            next[k] += (static_cast<double>(k) * gamma - static_cast<double>(q) + beta) * c[k];
            next[k + 1] -= gamma * c[k];
        }
        c = std::move(next);
    }
    return c;
}

}  // namespace detail

struct SuitabilityOrder {
    int p = 0;
    double value = 0.0;  // |Psi~_p(peak)| / p!
    double bound = 0.0;  // delta^{-p/2} (even p) or delta^{-(p-1)/2} (odd p)
    double margin = 0.0;  // bound - value
    bool pass = false;
};

struct SuitabilityReport {
    double delta = 0.0;
    std::vector<SuitabilityOrder> orders;
    double duration = 0.0;        // P
    double duration_upper = 0.0;  // sqrt(2/delta)
    bool duration_ok = false;     // 1 <= P <= sqrt(2/delta)
    bool all_pass = false;
};

/// Generalized Morse wavelet, frequency domain U(omega) a omega^beta exp(-omega^gamma),
/// normalized so the value at the peak frequency is 2.
struct MorseWavelet {
    double beta = 3.0;
    double gamma = 3.0;

    MorseWavelet() = default;
    MorseWavelet(double b, double g) : beta(b), gamma(g) {
        if (!(beta > 0.0) || !(gamma > 0.0))
            throw std::invalid_argument("MorseWavelet: beta and gamma must be positive");
    }

    double peak_frequency() const { return std::pow(beta / gamma, 1.0 / gamma); }

    /// Dimensionless duration P = sqrt(beta*gamma); P/pi counts oscillations in
    /// the central window.
    double duration() const { return std::sqrt(beta * gamma); }

    double amplitude_const() const { return std::exp(log_amplitude()); }

    double log_amplitude() const {
        return std::numbers::ln2 + (beta / gamma) * (1.0 + std::log(gamma) - std::log(beta));
    }

    /// Frequency-domain value; zero for omega <= 0.
    double evaluate(double omega) const {
        if (!(omega > 0.0)) return 0.0;
        return std::exp(log_amplitude() + beta * std::log(omega) - std::pow(omega, gamma));
    }

    /// omega^p Psi^(p)(omega) / Psi(omega) for p in 1..4, exact closed form.
    double dimensionless_derivative(int p, double omega) const {
        if (p < 1 || p > 4) throw std::invalid_argument("dimensionless_derivative: unsupported order");
        if (!(omega > 0.0)) throw std::invalid_argument("dimensionless_derivative: requires omega > 0");
        const std::vector<double> poly = detail::morse_dimensionless_poly(beta, gamma, p);
        const double u = std::pow(omega, gamma);
        double v = 0.0;
        for (std::size_t k = poly.size(); k-- > 0;) v = v * u + poly[k];
        return v;
    }

    /// Tests (1/p!)|Psi~_p(peak)| against the stability-level bounds for each
    /// order up to max_order, plus the duration window 1 <= P <= sqrt(2/delta).
    SuitabilityReport suitability(double delta, int max_order = 4) const {
        if (!(delta > 0.0) || delta >= 1.0)
            throw std::invalid_argument("suitability: signal is not a modulated oscillation (need 0 < delta < 1)");
        if (max_order < 1 || max_order > 4) throw std::invalid_argument("suitability: max_order must be 1..4");
        SuitabilityReport rep;
        rep.delta = delta;
        const double peak = peak_frequency();
        double factorial = 1.0;
        bool ok = true;
        for (int p = 1; p <= max_order; ++p) {
            factorial *= p;
            SuitabilityOrder ord;
            ord.p = p;
            ord.value = std::abs(dimensionless_derivative(p, peak)) / factorial;
            const double expo = (p % 2 == 0) ? -p / 2.0 : -(p - 1) / 2.0;
            ord.bound = std::pow(delta, expo);
            ord.margin = ord.bound - ord.value;
            ord.pass = ord.value <= ord.bound;
            ok = ok && ord.pass;
            rep.orders.push_back(ord);
        }
        rep.duration = duration();
        rep.duration_upper = std::sqrt(2.0 / delta);
        rep.duration_ok = rep.duration >= 1.0 && rep.duration <= rep.duration_upper;
        rep.all_pass = ok && rep.duration_ok;
        return rep;
    }

    /// Sampled psi(t/s)/s on a length-`length` grid with the wavelet centered
    /// mid-window, via inverse FFT of Psi(s*omega).  Far-field envelope decays
    /// like |t|^-(beta+1).
    Eigen::VectorXcd time_domain(Eigen::Index length, double scale, double dt = 1.0) const {
        if (length < 16) throw std::invalid_argument("time_domain: length must be >= 16");
        if (!(scale > 0.0)) throw std::invalid_argument("time_domain: scale must be positive");
        const double t_center = dt * static_cast<double>(length / 2);
        Eigen::VectorXcd spec = Eigen::VectorXcd::Zero(length);
        for (Eigen::Index k = 0; 2 * k <= length; ++k) {
            const double w = detail::bin_frequency(k, length, dt);
            spec[k] = evaluate(scale * w) / dt * std::exp(Complex{0.0, -w * t_center});
        }
        return detail::fft_inverse(spec);
    }
};

}  // namespace mvridge
