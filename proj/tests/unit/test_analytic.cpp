#include <doctest.h>

#include <cmath>

#include "boltz/analytic.hpp"
#include "boltz/errors.hpp"

using namespace boltz;

namespace {

// Reference values from tests/oracles/generate.py (mpmath, 40 digits): the specific heat is
// -K^2 du/dK of the closed-form elliptic-integral energy.
constexpr double beta_c = 0.44068679350977151;
constexpr double c_at_08 = 0.456194518133401;
constexpr double c_at_09 = 0.812622886605956;
constexpr double c_at_12 = 0.575561254544216;
constexpr double c_k03 = 0.286290202872046;
constexpr double c_k1 = 0.0233795646865421;
constexpr double m0_half = 0.911319377877496;
constexpr double m0_one = 0.999275751957061;

Lattice ring(int n, double beta, double J = 1, double h = 0)
{
    LatticeSpec s;
    s.dims = {n};
    s.beta = beta;
    s.J = J;
    s.h = h;
    return Lattice(s);
}

}  // namespace

TEST_CASE("transfer matrix")
{
    const auto r0 = ising1d_free_energy(0.7, 1.0, 0.0, 10);
    CHECK(r0.lambda_plus == doctest::Approx(2 * std::cosh(0.7)));
    CHECK(r0.lambda_minus == doctest::Approx(2 * std::sinh(0.7)));
    const auto r2 = ising1d_free_energy(1.0, 1.0, 0.0, 2);
    CHECK(std::exp(r2.log_partition) == doctest::Approx(4 * std::cosh(2.0)).epsilon(1e-12));
    const auto big = ising1d_free_energy(0.9, 1.3, 0.0, 100000);
    CHECK(big.per_particle_free_energy == doctest::Approx(-std::log(2 * std::cosh(0.9 * 1.3)) / 0.9).epsilon(1e-12));
    const auto huge = ising1d_free_energy(50.0, 3.0, 0.1, 1 << 20);
    CHECK(std::isfinite(huge.log_partition));

    for (int n = 2; n <= 10; ++n)
        for (double h : {0.0, 0.3}) {
            const auto tm = ising1d_free_energy(0.6, 1.0, h, n);
            const auto ex = enumerate_exact(ring(n, 0.6, 1.0, h));
            CHECK(std::abs(tm.log_partition - ex.log_partition) <= 1e-10 * std::abs(ex.log_partition));
        }
}

TEST_CASE("critical coupling")
{
    CHECK(critical_coupling() == doctest::Approx(beta_c).epsilon(1e-15));
}

TEST_CASE("Onsager specific heat")
{
    auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
    CHECK(rel(onsager_specific_heat(beta_c / 0.8).value, c_at_08) < 1e-6);
    CHECK(rel(onsager_specific_heat(beta_c / 0.9).value, c_at_09) < 1e-6);
    CHECK(rel(onsager_specific_heat(beta_c / 1.2).value, c_at_12) < 1e-6);
    CHECK(rel(onsager_specific_heat(0.3).value, c_k03) < 1e-6);
    CHECK(rel(onsager_specific_heat(1.0).value, c_k1) < 1e-6);
    CHECK(onsager_specific_heat(beta_c + 5e-5).near_singular);
    CHECK_FALSE(onsager_specific_heat(beta_c / 0.8).near_singular);
    double prev = 0;
    for (double d : {1e-1, 1e-2, 1e-3}) {
        const double c = onsager_specific_heat(beta_c * (1 + d)).value;
        CHECK(c > prev);
        prev = c;
    }
    for (double K = 0.05; K < 2; K += 0.05) CHECK(onsager_specific_heat(K).value > 0);
    CHECK(onsager_gamma(0.3) == doctest::Approx(std::log(2.0) + 0.09).epsilon(0.01));
}

TEST_CASE("spontaneous magnetization")
{
    CHECK(spontaneous_magnetization(beta_c) == 0);
    CHECK(spontaneous_magnetization(0.3) == 0);
    CHECK(spontaneous_magnetization(1.0) == doctest::Approx(m0_one).epsilon(1e-12));
    CHECK(spontaneous_magnetization(0.5) == doctest::Approx(m0_half).epsilon(1e-12));
    CHECK(spontaneous_magnetization(beta_c * (1 + 1e-10)) < 0.1);
    double prev = 0;
    for (double K = beta_c + 1e-3; K < 3; K += 0.01) {
        const double m = spontaneous_magnetization(K);
        CHECK(m >= prev);
        prev = m;
    }
}

TEST_CASE("exact enumeration")
{
    LatticeSpec s;
    s.dims = {2, 2};
    s.beta = 1e-12;
    const auto hot = enumerate_exact(Lattice(s));
    CHECK(hot.count() == 16);
    CHECK(hot.entropy == doctest::Approx(std::log(16.0)));
    CHECK(hot.probabilities.sum() == doctest::Approx(1).epsilon(1e-12));

    s.beta = 0.4;
    const Lattice lat(s);
    const auto ex = enumerate_exact(lat);
    CHECK(ex.mean_abs_m == doctest::Approx(0.8678335930926886).epsilon(1e-12));
    CHECK(ex.specific_heat() == doctest::Approx(1.6590345616164295).epsilon(1e-12));
    CHECK((ex.probabilities.array() >= 0).all());
    for (std::size_t k = 0; k < ex.count(); ++k) CHECK(state_index(ex.state(k, lat), lat) == k);
    CHECK(ex.energies[0] == doctest::Approx(lattice_energy(ex.state(0, lat), lat)));

    s.dims = {21};
    CHECK_THROWS_AS(enumerate_exact(Lattice(s)), Refusal);
}

TEST_CASE("kernel asymptotic variance")
{
    const auto m = [](const LatticeConfig& c) { return c.spins.mean(); };
    for (double beta : {0.3, 0.7}) {
        const auto lat = ring(4, beta);
        const double nm = exact_kernel_variance(SingleSiteKernel::Metropolis, lat, m);
        const double ng = exact_kernel_variance(SingleSiteKernel::Glauber, lat, m);
        const auto ex = enumerate_exact(lat);
        const double var = (ex.probabilities.array() * ex.magnetization.array().square()).sum() -
                           std::pow(ex.probabilities.dot(ex.magnetization), 2);
        CHECK(nm <= ng + 1e-9);
        CHECK(ng <= 2 * nm + var + 1e-9);
        const auto P = transition_matrix(SingleSiteKernel::Metropolis, lat);
        CHECK((P.rowwise().sum().array() - 1).abs().maxCoeff() < 1e-12);
        CHECK((ex.probabilities.transpose() * P - ex.probabilities.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
    const auto lat = ring(4, 0.5);
    CHECK(std::abs(exact_kernel_variance(SingleSiteKernel::Glauber, lat, [](const LatticeConfig&) { return 2.0; })) < 1e-12);
    const double r1 = exact_kernel_variance(SingleSiteKernel::Glauber, ring(4, 1e-3), m) /
                      exact_kernel_variance(SingleSiteKernel::Metropolis, ring(4, 1e-3), m);
    const double r2 = exact_kernel_variance(SingleSiteKernel::Glauber, ring(4, 2e-3), m) /
                      exact_kernel_variance(SingleSiteKernel::Metropolis, ring(4, 2e-3), m);
    CHECK(r1 == doctest::Approx(r2).epsilon(1e-2));
    CHECK(r1 > 1);
}

TEST_CASE("asymptotic variance of a two-state chain")
{
    // Flip with probability a from either state: nu = Var f (1 - a) / a for f = indicator.
    for (double a : {0.2, 0.5, 0.9}) {
        Eigen::Matrix2d P;
        P << 1 - a, a, a, 1 - a;
        const Eigen::Vector2d pi(0.5, 0.5), f(1, 0);
        CHECK(asymptotic_variance(P, pi, f) == doctest::Approx(0.25 * (1 - a) / a).epsilon(1e-12));
    }
}
