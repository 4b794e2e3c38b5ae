#include <catch2/catch_amalgamated.hpp>

#include <mvridge/analytic.hpp>
#include <mvridge/moments.hpp>
#include <mvridge/synth.hpp>

using namespace mvridge;

namespace {

constexpr double kTwoPi = mvridge::detail::kTwoPi;

struct Derivatives {
    AnalyticSignal z, z1, z2, z3;
};

Derivatives analyze(const MultivariateSeries& x) {
    Derivatives d;
    d.z = analytic_signal(x);
    d.z1 = spectral_derivative(d.z, 1);
    d.z2 = spectral_derivative(d.z, 2);
    d.z3 = spectral_derivative(d.z, 3);
    return d;
}

AnalyticSignal phasor_pair(Eigen::Index t, double om1, double om2, double a1, double a2) {
    AnalyticSignal z;
    z.data.resize(2, t);
    for (Eigen::Index i = 0; i < t; ++i) {
        z.data(0, i) = a1 * std::exp(Complex{0.0, om1 * static_cast<double>(i)});
        z.data(1, i) = a2 * std::exp(Complex{0.0, om2 * static_cast<double>(i)});
    }
    z.removed_means = Eigen::VectorXd::Zero(2);
    return z;
}

/// Per-channel instantaneous frequency from the polar decomposition: unwrap the
/// phase, split off the exact integer winding across the (periodic) record, and
/// differentiate the periodic remainder spectrally.
Eigen::VectorXd polar_channel_frequency(const Eigen::VectorXcd& row, double dt) {
    const Eigen::Index t = row.size();
    Eigen::VectorXd phi(t);
    double prev = std::arg(row[0]);
    double acc = prev;
    phi[0] = acc;
    for (Eigen::Index i = 1; i < t; ++i) {
        const double cur = std::arg(row[i]);
        double step = cur - prev;
        while (step > mvridge::detail::kPi) step -= kTwoPi;
        while (step < -mvridge::detail::kPi) step += kTwoPi;
        acc += step;
        phi[i] = acc;
        prev = cur;
    }
    // per-sample winding of the periodic extension
    const double step_est = (phi[t - 1] - phi[0]) / static_cast<double>(t - 1);
    const double winding = std::round(step_est * static_cast<double>(t) / kTwoPi) * kTwoPi /
                           static_cast<double>(t);
    Eigen::VectorXd remainder(t);
    for (Eigen::Index i = 0; i < t; ++i) phi[i] -= winding * static_cast<double>(i);
    const Eigen::VectorXd d = mvridge::detail::spectral_diff_periodic(phi, dt);
    return d.array() + winding / dt;
}

}  // namespace

TEST_CASE("joint frequency is the power-weighted channel average", "[moments]") {
    const Eigen::Index t = 512;
    const double om1 = kTwoPi * 30.0 / static_cast<double>(t);
    const double om2 = kTwoPi * 45.0 / static_cast<double>(t);

    SECTION("equal amplitudes give the arithmetic mean") {
        const AnalyticSignal z = phasor_pair(t, om1, om2, 1.0, 1.0);
        const Eigen::VectorXd om = joint_frequency(z, spectral_derivative(z, 1));
        for (Eigen::Index i = 0; i < t; ++i)
            REQUIRE(om[i] == Catch::Approx(0.5 * (om1 + om2)).epsilon(1e-10));
    }

    SECTION("amplitude 2 vs 1 weights as 4:1") {
        const AnalyticSignal z = phasor_pair(t, om1, om2, 2.0, 1.0);
        const Eigen::VectorXd om = joint_frequency(z, spectral_derivative(z, 1));
        for (Eigen::Index i = 0; i < t; ++i)
            REQUIRE(om[i] == Catch::Approx((4.0 * om1 + om2) / 5.0).epsilon(1e-10));
    }

    SECTION("N=1 reduces to the phase derivative") {
        SyntheticSpec spec;
        spec.kind = SyntheticSpec::Kind::gaussian_envelope;
        spec.samples = 2048;
        spec.omega = kTwoPi * 0.06;
        spec.sigma = 230.0;
        const SyntheticSignal sig = generate(spec);
        const Derivatives d = analyze(sig.observed);
        const Eigen::VectorXd om = joint_frequency(d.z, d.z1);
        for (Eigen::Index i = 800; i < 1300; ++i)
            REQUIRE(om[i] == Catch::Approx(spec.omega).epsilon(1e-6));
    }

    SECTION("shape mismatch throws") {
        const AnalyticSignal z = phasor_pair(t, om1, om2, 1.0, 1.0);
        AnalyticSignal z1 = spectral_derivative(z, 1);
        z1.data.conservativeResize(1, t);
        REQUIRE_THROWS_AS(joint_frequency(z, z1), invalid_input);
    }
}

TEST_CASE("power-weighted identity against the polar route", "[moments]") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const MultivariateSeries x = random_multicomponent(seed, 3, 1024, 1.0, 4, 150, 190, 4.0);
        const Derivatives d = analyze(x);
        const Eigen::VectorXd om = joint_frequency(d.z, d.z1);

        const PolarDecomposition pol = polar_decompose(d.z);
        Eigen::VectorXd num = Eigen::VectorXd::Zero(x.samples());
        Eigen::VectorXd den = Eigen::VectorXd::Zero(x.samples());
        for (Eigen::Index c = 0; c < 3; ++c) {
            const Eigen::VectorXd om_c = polar_channel_frequency(d.z.data.row(c), x.dt);
            num += pol.amplitudes.row(c).transpose().array().square().matrix().asDiagonal() * om_c;
            den += pol.amplitudes.row(c).transpose().array().square().matrix();
        }
        for (Eigen::Index i = 0; i < x.samples(); ++i)
            REQUIRE(std::abs(om[i] - num[i] / den[i]) <= 1e-10 * std::abs(om[i]));
    }
}

TEST_CASE("deviation vectors vanish for a pure oscillation", "[moments]") {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::pure_oscillation;
    spec.channels = 3;
    spec.samples = 512;
    spec.omega = kTwoPi * 32.0 / 512.0;  // exact DFT bin keeps the record periodic
    const SyntheticSignal sig = generate(spec);
    const Derivatives d = analyze(sig.observed);
    const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);

    const double om_scale = spec.omega;
    REQUIRE(dev.x1.cwiseAbs().maxCoeff() <= 1e-10 * om_scale);
    REQUIRE(dev.x2.cwiseAbs().maxCoeff() <= 1e-10 * om_scale * om_scale);
    REQUIRE(dev.upsilon.maxCoeff() <= 1e-10);
    REQUIRE(dev.xi.maxCoeff() <= 1e-10);
    for (Eigen::Index i = 0; i < 512; ++i) REQUIRE(dev.omega[i] == Catch::Approx(spec.omega));

    const StabilityReport rep = stability_level(dev, 0, 512);
    REQUIRE(rep.delta <= 1e-6);
    REQUIRE(rep.is_modulated_oscillation());
}

TEST_CASE("phase-signal identities: x1 vanishes, x2 = i omega' x", "[moments]") {
    // FM phase signal with integer carrier and modulation cycles, so the
    // record is exactly one period and the deviation algebra is noise-free
    const Eigen::Index t = 4096;
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::phase_signal;
    spec.channels = 2;
    spec.samples = t;
    spec.omega = kTwoPi * 409.0 / static_cast<double>(t);
    spec.fm_depth = 0.05;
    spec.fm_rate = kTwoPi * 8.0 / static_cast<double>(t);
    const SyntheticSignal sig = generate(spec);
    const Derivatives d = analyze(sig.observed);
    const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);

    double worst1 = 0.0, worst2 = 0.0, worst_xi = 0.0, worst_od = 0.0;
    const double od_scale = spec.fm_depth * spec.omega * spec.fm_rate;
    for (Eigen::Index i = 0; i < t; ++i) {
        // truth: omega' = m w0 wm cos(wm (tau - t_mid))
        const double tau = static_cast<double>(i) - static_cast<double>(t) / 2.0;
        const double od_true = od_scale * std::cos(spec.fm_rate * tau);
        double n1 = 0.0, n2 = 0.0, nz = 0.0;
        for (Eigen::Index c = 0; c < 2; ++c) {
            n1 += std::norm(dev.x1(c, i));
            n2 += std::norm(dev.x2(c, i) - Complex{0.0, od_true} * d.z.data(c, i));
            nz += std::norm(d.z.data(c, i));
        }
        worst1 = std::max(worst1, std::sqrt(n1 / nz));
        worst2 = std::max(worst2, std::sqrt(n2 / nz));
        worst_xi = std::max(worst_xi, std::abs(dev.xi[i] - std::abs(od_true)));
        worst_od = std::max(worst_od, std::abs(dev.omega_dot[i] - od_true));
    }
    REQUIRE(worst1 <= 1e-4);
    REQUIRE(worst2 <= 1e-3);
    REQUIRE(worst_xi <= 1e-6 * od_scale);
    REQUIRE(worst_od <= 1e-6 * od_scale);
}

TEST_CASE("windowed chirp reproduces the univariate curvature law", "[moments]") {
    // gaussian envelope on a linear chirp: xi = |a''/a + i phi''| in closed
    // form, and the decayed ends keep the periodic FFT free of wrap leakage
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::gaussian_envelope;
    spec.samples = 4096;
    spec.omega = kTwoPi * 0.1;
    spec.sigma = 160.0;
    spec.chirp_rate = 3.54e-4;
    const SyntheticSignal sig = generate(spec);
    const Derivatives d = analyze(sig.observed);
    const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);
    const double xi_scale = sig.truth.xi.segment(sig.truth.window_begin,
                                                 sig.truth.window_end - sig.truth.window_begin)
                                .maxCoeff();
    for (Eigen::Index i = sig.truth.window_begin; i < sig.truth.window_end; ++i) {
        REQUIRE(std::abs(dev.xi[i] - sig.truth.xi[i]) <= 1e-3 * xi_scale);
        REQUIRE(dev.omega[i] == Catch::Approx(sig.truth.omega[i]).epsilon(1e-4));
        REQUIRE(std::abs(dev.upsilon[i] - sig.truth.upsilon[i]) <= 1e-3 / spec.sigma);
    }
}

TEST_CASE("univariate gaussian envelope reproduces closed-form moments", "[moments]") {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::gaussian_envelope;
    spec.samples = 4096;
    spec.omega = kTwoPi * 0.08;
    spec.sigma = 256.0;
    const SyntheticSignal sig = generate(spec);
    const Derivatives d = analyze(sig.observed);
    const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);

    // within one envelope width the truth moments hold to 1e-4 relative
    const double xi_scale = 1.0 / (spec.sigma * spec.sigma);
    for (Eigen::Index i = sig.truth.window_begin; i < sig.truth.window_end; ++i) {
        REQUIRE(std::abs(dev.upsilon[i] - sig.truth.upsilon[i]) <= 1e-4 * xi_scale * spec.sigma);
        REQUIRE(std::abs(dev.xi[i] - sig.truth.xi[i]) <= 1e-4 * xi_scale);
        REQUIRE(dev.omega[i] == Catch::Approx(spec.omega).epsilon(1e-6));
    }
}

TEST_CASE("frequency error curve is minimized at the joint frequency", "[moments]") {
    const Eigen::Index t = 512;
    const double om0 = kTwoPi * 40.0 / static_cast<double>(t);

    SECTION("pure phasor closed forms") {
        AnalyticSignal z;
        z.data.resize(1, t);
        for (Eigen::Index i = 0; i < t; ++i)
            z.data(0, i) = std::exp(Complex{0.0, om0 * static_cast<double>(i)});
        const AnalyticSignal z1 = spectral_derivative(z, 1);
        const Eigen::VectorXd at_true = frequency_error_curve(z, z1, om0);
        const Eigen::VectorXd at_zero = frequency_error_curve(z, z1, 0.0);
        REQUIRE(at_true.maxCoeff() <= 1e-20);
        for (Eigen::Index i = 0; i < t; ++i)
            REQUIRE(at_zero[i] == Catch::Approx(om0 * om0).epsilon(1e-10));
    }

    SECTION("random multicomponent: argmin on a dense trial grid sits at omega_x") {
        const MultivariateSeries x = random_multicomponent(17u, 2, 700, 1.0, 4, 50, 120);
        const Derivatives d = analyze(x);
        const Eigen::VectorXd om = joint_frequency(d.z, d.z1);
        const double lo = om.minCoeff() * 0.5, hi = om.maxCoeff() * 1.5;
        const int trials = 400;
        const double step = (hi - lo) / (trials - 1);
        std::vector<Eigen::VectorXd> curves;
        curves.reserve(trials);
        for (int k = 0; k < trials; ++k)
            curves.push_back(frequency_error_curve(d.z, d.z1, lo + step * k));
        for (Eigen::Index i = 100; i < 600; i += 25) {
            int best = 0;
            for (int k = 1; k < trials; ++k)
                if (curves[k][i] < curves[best][i]) best = k;
            REQUIRE(std::abs(lo + step * best - om[i]) <= step);
            // convexity at the minimizer
            const Eigen::VectorXd up = frequency_error_curve(d.z, d.z1, om[i] + 4 * step);
            const Eigen::VectorXd dn = frequency_error_curve(d.z, d.z1, om[i] - 4 * step);
            const Eigen::VectorXd at = frequency_error_curve(d.z, d.z1, om[i]);
            REQUIRE(up[i] > at[i]);
            REQUIRE(dn[i] > at[i]);
        }
    }
}

TEST_CASE("curvature dominates the chirp rate", "[moments]") {
    int violations = 0;
    for (std::uint64_t seed = 100; seed < 130; ++seed) {
        const MultivariateSeries x = random_multicomponent(seed, 2, 1024, 1.0, 5, 50, 150);
        const Derivatives d = analyze(x);
        const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);
        for (Eigen::Index i = 0; i < x.samples(); ++i) {
            if (!dev.valid(i)) continue;
            if (dev.xi[i] < std::abs(dev.omega_dot[i]) - 1e-8) ++violations;
        }
    }
    REQUIRE(violations == 0);
}

TEST_CASE("stability level classifies signals", "[moments]") {
    SECTION("windowed linear chirp is curvature-dominated") {
        // constant-amplitude chirps never decay, so the finite record is framed
        // by a wide gaussian window; the chirp rate is sized to dominate
        SyntheticSpec spec;
        spec.kind = SyntheticSpec::Kind::gaussian_envelope;
        spec.samples = 4096;
        spec.omega = kTwoPi * 0.1;
        spec.sigma = 160.0;
        spec.chirp_rate = 3.54e-4;
        const SyntheticSignal sig = generate(spec);
        const Derivatives d = analyze(sig.observed);
        const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);

        const Eigen::Index lo = 2048 - 40, hi = 2048 + 40;  // |u| <= sigma/4
        const StabilityReport rep = stability_level(dev, lo, hi);
        // truth-side oracle over the same window from the closed-form moments
        double expect = 0.0;
        for (Eigen::Index i = lo; i < hi; ++i) {
            const double om = sig.truth.omega[i];
            expect = std::max(expect, sig.truth.upsilon[i] / om);
            expect = std::max(expect, std::sqrt(sig.truth.xi[i] / (om * om)));
            double nrm = 0.0;
            for (Eigen::Index c = 0; c < 1; ++c) nrm += std::norm(sig.truth.x_plus(c, i));
            expect = std::max(expect,
                              std::cbrt(sig.truth.jerk_norm[i] / (std::sqrt(nrm) * om * om * om)));
        }
        REQUIRE(rep.delta == Catch::Approx(expect).epsilon(0.02));
        REQUIRE(rep.term_curvature > rep.term_bandwidth);
        REQUIRE(rep.term_curvature > rep.term_jerk_proxy);
        REQUIRE(rep.is_modulated_oscillation());
    }

    SECTION("white noise is usually not a modulated oscillation") {
        int not_modulated = 0;
        const int runs = 100;
        for (int k = 0; k < runs; ++k) {
            detail::Rng rng(static_cast<std::uint64_t>(k) + 7000u);
            MultivariateSeries x;
            x.data.resize(1, 512);
            for (Eigen::Index i = 0; i < 512; ++i) x.data(0, i) = rng.gaussian();
            const Derivatives d = analyze(x);
            const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);
            const StabilityReport rep = stability_level(dev, 16, 512 - 16);
            if (!rep.is_modulated_oscillation()) ++not_modulated;
        }
        REQUIRE(not_modulated >= 95);
    }

    SECTION("empty interval throws") {
        SyntheticSpec spec;
        spec.samples = 64;
        const SyntheticSignal sig = generate(spec);
        const Derivatives d = analyze(sig.observed);
        const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);
        REQUIRE_THROWS_AS(stability_level(dev, 10, 10), std::invalid_argument);
    }
}

TEST_CASE("projection and derivative identities hold to discretization", "[moments]") {
    SECTION("band-limited multicomponent signals") {
        for (std::uint64_t seed = 40; seed < 46; ++seed) {
            const MultivariateSeries x = random_multicomponent(seed, 2, 2048, 1.0, 4, 320, 370, 4.0);
            const Derivatives d = analyze(x);
            const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);
            const IdentityResiduals res = projection_identities(dev, d.z, /*trim=*/32);
            REQUIRE(res.parallel_bandwidth <= 1e-6);
            REQUIRE(res.chirp_projection <= 1e-6);
            REQUIRE(res.first_derivative <= 1e-6);
            REQUIRE(res.second_derivative <= 1e-6);
        }
    }

    SECTION("pure oscillation residuals are at machine level") {
        SyntheticSpec spec;
        spec.kind = SyntheticSpec::Kind::pure_oscillation;
        spec.channels = 2;
        spec.samples = 512;
        spec.omega = kTwoPi * 32.0 / 512.0;
        const SyntheticSignal sig = generate(spec);
        const Derivatives d = analyze(sig.observed);
        const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);
        const IdentityResiduals res = projection_identities(dev, d.z);
        REQUIRE(res.parallel_bandwidth <= 1e-10);
        REQUIRE(res.chirp_projection <= 1e-10);
        REQUIRE(res.first_derivative <= 1e-10);
        REQUIRE(res.second_derivative <= 1e-10);
    }

    SECTION("phase signal: the chirp projection reduces to omega'") {
        const Eigen::Index t = 4096;
        SyntheticSpec spec;
        spec.kind = SyntheticSpec::Kind::phase_signal;
        spec.channels = 2;
        spec.samples = t;
        spec.omega = kTwoPi * 409.0 / static_cast<double>(t);
        spec.fm_depth = 0.05;
        spec.fm_rate = kTwoPi * 8.0 / static_cast<double>(t);
        const SyntheticSignal sig = generate(spec);
        const Derivatives d = analyze(sig.observed);
        const DeviationSet dev = deviation_vectors(d.z, d.z1, d.z2, d.z3);
        const IdentityResiduals res = projection_identities(dev, d.z);
        REQUIRE(res.chirp_projection <= 1e-8);
    }
}
