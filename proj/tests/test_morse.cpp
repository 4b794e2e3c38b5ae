#include <catch2/catch_amalgamated.hpp>

#include <mvridge/morse.hpp>
#include <mvridge/synth.hpp>

using namespace mvridge;

namespace {

/// Finite-difference oracle: central differences of ln(Psi), combined into
/// Psi^(p)/Psi with the complete Bell polynomials (Faa di Bruno).
double fd_dimensionless(const MorseWavelet& w, int p, double omega, double h) {
    auto logpsi = [&](double x) { return std::log(w.evaluate(x)); };
    const double lm2 = logpsi(omega - 2 * h), lm1 = logpsi(omega - h), l0 = logpsi(omega),
                 lp1 = logpsi(omega + h), lp2 = logpsi(omega + 2 * h);
    const double d1 = (lp1 - lm1) / (2 * h);
    const double d2 = (lp1 - 2 * l0 + lm1) / (h * h);
    const double d3 = (lp2 - 2 * lp1 + 2 * lm1 - lm2) / (2 * h * h * h);
    const double d4 = (lp2 - 4 * lp1 + 6 * l0 - 4 * lm1 + lm2) / (h * h * h * h);
    double ratio = 0.0;
    switch (p) {
        case 1: ratio = d1; break;
        case 2: ratio = d2 + d1 * d1; break;
        case 3: ratio = d3 + 3 * d2 * d1 + d1 * d1 * d1; break;
        case 4: ratio = d4 + 4 * d3 * d1 + 3 * d2 * d2 + 6 * d2 * d1 * d1 + d1 * d1 * d1 * d1; break;
        default: FAIL("unsupported order");
    }
    return std::pow(omega, p) * ratio;
}

}  // namespace

TEST_CASE("normalization: value 2 at the peak frequency", "[morse]") {
    const MorseWavelet w33(3.0, 3.0);
    REQUIRE(w33.evaluate(w33.peak_frequency()) == Catch::Approx(2.0).epsilon(1e-13));
    REQUIRE(w33.peak_frequency() == Catch::Approx(1.0));
    REQUIRE(w33.evaluate(0.0) == 0.0);
    // (3,3) at omega=2: a = 2(e*gamma/beta)^(beta/gamma) = 2e, value = 2e * 8 * e^-8 = 16 e^-7
    REQUIRE(w33.evaluate(2.0) == Catch::Approx(16.0 * std::exp(-7.0)).epsilon(1e-12));

    detail::Rng rng(99u);
    for (int k = 0; k < 50; ++k) {
        const double beta = 2.0 + 8.0 * rng.uniform();
        const double gamma = 1.0 + 5.0 * rng.uniform();
        const MorseWavelet w(beta, gamma);
        REQUIRE(std::abs(w.evaluate(w.peak_frequency()) - 2.0) <= 1e-12);
        // peak property
        const double peak = w.peak_frequency();
        REQUIRE(w.evaluate(peak * 1.001) < w.evaluate(peak));
        REQUIRE(w.evaluate(peak * 0.999) < w.evaluate(peak));
    }
}

TEST_CASE("peak frequency and duration closed forms", "[morse]") {
    REQUIRE(MorseWavelet(3, 3).duration() == Catch::Approx(3.0));
    REQUIRE(MorseWavelet(8, 3).duration() == Catch::Approx(2.0 * std::sqrt(6.0)));
    for (double g : {1.5, 2.0, 3.0, 4.5})
        REQUIRE(MorseWavelet(g, g).peak_frequency() == Catch::Approx(1.0));
}

TEST_CASE("dimensionless derivatives: closed form vs finite differences", "[morse]") {
    const MorseWavelet w33(3.0, 3.0);
    const MorseWavelet w83(8.0, 3.0);

    REQUIRE(w33.dimensionless_derivative(1, w33.peak_frequency()) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(w33.dimensionless_derivative(2, w33.peak_frequency()) == Catch::Approx(-9.0).epsilon(1e-10));
    REQUIRE(w83.dimensionless_derivative(2, w83.peak_frequency()) == Catch::Approx(-24.0).epsilon(1e-10));

    // P^2 = beta*gamma = -Psi~_2(peak)
    for (const MorseWavelet& w : {w33, w83, MorseWavelet(4.0, 2.0)}) {
        const double p2 = w.duration() * w.duration();
        REQUIRE(-w.dimensionless_derivative(2, w.peak_frequency()) == Catch::Approx(p2).epsilon(1e-8));
    }

    for (const MorseWavelet& w : {w33, w83, MorseWavelet(5.0, 2.0)}) {
        for (int p = 1; p <= 4; ++p) {
            const double tol = (p <= 2) ? 1e-6 : 5e-4;
            const double h = (p <= 2) ? 3e-4 : 2e-3;
            for (double omega : {0.7 * w.peak_frequency(), w.peak_frequency(), 1.3 * w.peak_frequency()}) {
                const double exact = w.dimensionless_derivative(p, omega);
                const double fd = fd_dimensionless(w, p, omega, h * omega);
                REQUIRE(fd == Catch::Approx(exact).epsilon(tol).margin(tol));
            }
        }
    }

    REQUIRE_THROWS_AS(w33.dimensionless_derivative(5, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(w33.dimensionless_derivative(0, 1.0), std::invalid_argument);
}

TEST_CASE("suitability criteria", "[morse]") {
    const MorseWavelet w33(3.0, 3.0);
    // delta = 0.1, p = 2: |Psi~_2|/2 = 4.5 <= 1/delta = 10
    const SuitabilityReport rep = w33.suitability(0.1, 2);
    REQUIRE(rep.orders.size() == 2);
    REQUIRE(rep.orders[1].value == Catch::Approx(4.5));
    REQUIRE(rep.orders[1].bound == Catch::Approx(10.0));
    REQUIRE(rep.orders[1].pass);
    REQUIRE(rep.duration_ok);  // P = 3 <= sqrt(2/0.1) ~ 4.47

    // (8,3) at delta = 0.5 fails at second order: 12 > 2
    const SuitabilityReport bad = MorseWavelet(8.0, 3.0).suitability(0.5, 2);
    REQUIRE(bad.orders[1].value == Catch::Approx(12.0));
    REQUIRE(bad.orders[1].bound == Catch::Approx(2.0));
    REQUIRE_FALSE(bad.orders[1].pass);
    REQUIRE_FALSE(bad.all_pass);

    // delta -> 1: second order passes iff P <= sqrt(2)
    const double delta = 0.999999;
    REQUIRE(MorseWavelet(1.0, 1.9).suitability(delta, 2).orders[1].pass);   // P^2 = 1.9 < 2
    REQUIRE_FALSE(MorseWavelet(1.5, 2.0).suitability(delta, 2).orders[1].pass);  // P^2 = 3 > 2

    REQUIRE_THROWS_AS(w33.suitability(1.0, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(w33.suitability(-0.1, 2), std::invalid_argument);
}

TEST_CASE("time-domain wavelet: decay, zero mean, 1/s peak scaling", "[morse]") {
    const MorseWavelet w33(3.0, 3.0);
    const Eigen::Index len = 8192;
    const Eigen::VectorXcd psi = w33.time_domain(len, 40.0);

    // zero mean
    double peak = psi.cwiseAbs().maxCoeff();
    REQUIRE(std::abs(psi.sum()) <= 1e-10 * peak * static_cast<double>(len));

    // far-field log-log slope of the envelope ~ -(beta+1) = -4
    const Eigen::Index center = len / 2;
    const Eigen::Index r1 = 600, r2 = 2400;  // wavelet width is ~P*s = 120 samples
    double m1 = 0.0, m2 = 0.0;
    for (Eigen::Index i = -20; i <= 20; ++i) {
        m1 += std::abs(psi[center + r1 + i]) / 41.0;
        m2 += std::abs(psi[center + r2 + i]) / 41.0;
    }
    const double slope = std::log(m2 / m1) / std::log(static_cast<double>(r2) / static_cast<double>(r1));
    REQUIRE(slope == Catch::Approx(-4.0).margin(0.5));

    // peak magnitude scales as 1/s
    const double peak_s1 = w33.time_domain(len, 40.0).cwiseAbs().maxCoeff();
    const double peak_s2 = w33.time_domain(len, 80.0).cwiseAbs().maxCoeff();
    REQUIRE(peak_s1 / peak_s2 == Catch::Approx(2.0).epsilon(0.01));

    REQUIRE_THROWS_AS(w33.time_domain(8, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(w33.time_domain(64, -1.0), std::invalid_argument);
}

TEST_CASE("admissibility integral converges", "[morse]") {
    // trapezoid quadrature of |Psi|^2 / omega; finite and stable under refinement
    auto integral = [](const MorseWavelet& w, int n) {
        const double hi = 12.0;
        const double h = hi / n;
        double sum = 0.0;
        for (int i = 1; i < n; ++i) {
            const double om = h * i;
            const double v = w.evaluate(om);
            sum += v * v / om * h;
        }
        return sum;
    };
    const MorseWavelet w(3.0, 3.0);
    const double coarse = integral(w, 20000);
    const double fine = integral(w, 40000);
    REQUIRE(std::isfinite(fine));
    REQUIRE(fine == Catch::Approx(coarse).epsilon(1e-6));
}
