#include <doctest.h>

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "boltz/analytic.hpp"
#include "boltz/errors.hpp"
#include "boltz/lattice_samplers.hpp"
#include "boltz/observables.hpp"
#include "boltz/stats.hpp"

using namespace boltz;

namespace {

Lattice ising(std::vector<int> dims, double beta, double h = 0)
{
    LatticeSpec s;
    s.dims = std::move(dims);
    s.beta = beta;
    s.h = h;
    return Lattice(s);
}

Lattice xy_pair(double beta)
{
    LatticeSpec s;
    s.model = LatticeModel::XY;
    s.dims = {2};
    s.beta = beta;
    return Lattice(s);
}

/// Batch-means test of visit frequencies against the exact distribution.
template <typename Step>
double stationarity_p(const Lattice& lat, Step step, std::size_t samples, std::uint64_t seed)
{
    const auto ex = enumerate_exact(lat);
    LatticeChainState st{ordered_config(lat), Rng(seed), 0};
    for (int k = 0; k < 1000; ++k) step(st);
    std::vector<int> states(samples);
    for (auto& s : states) {
        step(st);
        s = static_cast<int>(state_index(st.config, lat));
    }
    return batch_means_frequency_test(states, ex.probabilities, 100).p_value;
}

/// CDF of psi = theta_1 - theta_2 mod 2 pi under exp(2 beta J cos psi).
std::function<double(double)> pair_angle_cdf(double beta)
{
    using boost::math::quadrature::gauss_kronrod;
    auto w = [beta](double t) { return std::exp(2 * beta * std::cos(t)); };
    const double z = gauss_kronrod<double, 61>::integrate(w, 0.0, 2 * std::numbers::pi, 15, 1e-14);
    return [w, z](double x) { return gauss_kronrod<double, 61>::integrate(w, 0.0, x, 15, 1e-14) / z; };
}

double pair_angle(const LatticeConfig& c) { return reduce_angle(c.spins[0] - c.spins[1]); }

double ks_correlated_p(const std::vector<double>& xs, const std::function<double(double)>& cdf)
{
    const double tau = std::max(1.0, integrated_autocorrelation_time(xs));
    const auto res = ks_test(xs, cdf);
    return ks_p_value(res.statistic, static_cast<double>(xs.size()) / tau);
}

}  // namespace

TEST_CASE("acceptance rules")
{
    CHECK(metropolis_acceptance(0) == 1);
    CHECK(metropolis_acceptance(std::log(2.0)) == doctest::Approx(0.5));
    CHECK(metropolis_acceptance(-3) == 1);
    CHECK(glauber_acceptance(0) == doctest::Approx(0.5));
    CHECK(glauber_acceptance(std::log(3.0)) == doctest::Approx(0.25));
    for (double d = -5; d <= 5; d += 0.25)
        if (d != 0) CHECK(glauber_acceptance(d) < metropolis_acceptance(d));
    CHECK(glauber_acceptance(0) == doctest::Approx(0.5 * metropolis_acceptance(0)));
    CHECK(bond_probability(0.5, 1.0, true) == doctest::Approx(0.63212055882855767));
    CHECK(bond_probability(0.5, 1.0, false) == 0);
}

TEST_CASE("unsupported combinations")
{
    const auto lat = ising({4, 4}, 0.5, 0.1);
    LatticeChainState st{ordered_config(lat), Rng(1), 0};
    CHECK_THROWS_AS(swendsen_wang_step(st, lat), Unsupported);
    CHECK_THROWS_AS(wolff_step(st, lat), Unsupported);
    LatticeSpec p;
    p.model = LatticeModel::Potts;
    p.q = 3;
    p.dims = {3, 3};
    const Lattice potts(p);
    LatticeChainState ps{ordered_config(potts), Rng(1), 0};
    CHECK_THROWS_AS(glauber_sweep(ps, potts), Unsupported);
    LatticeSpec x = xy_pair(1.0).spec();
    x.h_xy = {0.1, 0};
    const Lattice xf(x);
    LatticeChainState xs{ordered_config(xf), Rng(1), 0};
    XYEventChainState chain;
    CHECK_THROWS_AS(ecmc_xy_run(xs, chain, xf, 1.0), Unsupported);
}

TEST_CASE("bond field respects alignment")
{
    const auto lat = ising({6, 5}, 0.6);
    LatticeChainState st{ordered_config(lat), Rng(3), 0};
    for (int n = 0; n < 50; ++n) {
        metropolis_sweep(st, lat);
        const auto b = sample_bonds(st.config, lat, st.rng);
        CHECK(b.edges.size() == 2 * lat.size());
        for (std::size_t e = 0; e < b.edges.size(); ++e)
            if (b.open[e]) CHECK(st.config.spins[b.edges[e].first] == st.config.spins[b.edges[e].second]);
    }
}

TEST_CASE("Wolff limits")
{
    const auto hot = ising({8, 8}, 1e-9);
    LatticeChainState st{ordered_config(hot), Rng(5), 0};
    for (int n = 0; n < 100; ++n) CHECK(wolff_step(st, hot) == 1);
    const auto cold = ising({8, 8}, 50);
    LatticeChainState cs{ordered_config(cold), Rng(5), 0};
    CHECK(wolff_step(cs, cold) == 64);
    CHECK(magnetic_density(cs.config, cold)[0] == -1);
    CHECK(wolff_step(cs, cold) == 64);
    CHECK(magnetic_density(cs.config, cold)[0] == 1);
    CHECK(cs.time == 2);
}

TEST_CASE("stationarity on 2x2 Ising")
{
    for (double beta : {0.4, 0.5}) {
        const auto lat = ising({2, 2}, beta);
        CHECK(stationarity_p(lat, [&](auto& s) { metropolis_sweep(s, lat); }, 200000, 11) > 1e-3);
        CHECK(stationarity_p(lat, [&](auto& s) { glauber_sweep(s, lat); }, 200000, 12) > 1e-3);
        CHECK(stationarity_p(lat, [&](auto& s) { swendsen_wang_step(s, lat); }, 200000, 13) > 1e-3);
        CHECK(stationarity_p(lat, [&](auto& s) { wolff_step(s, lat); }, 200000, 14) > 1e-3);
    }
    const auto field = ising({2, 2}, 0.4, 0.3);
    CHECK(stationarity_p(field, [&](auto& s) { metropolis_sweep(s, field); }, 200000, 16) > 1e-3);
    SingleSiteOptions sys{ScanOrder::Systematic, 1.0};
    CHECK(stationarity_p(field, [&](auto& s) { metropolis_sweep(s, field, sys); }, 200000, 15) > 1e-3);
    CHECK(stationarity_p(field, [&](auto& s) { glauber_sweep(s, field); }, 200000, 17) > 1e-3);
    LatticeSpec p;
    p.model = LatticeModel::Potts;
    p.q = 3;
    p.dims = {2, 2};
    p.beta = 0.7;
    const Lattice potts(p);
    CHECK(stationarity_p(potts, [&](auto& s) { metropolis_sweep(s, potts); }, 200000, 18) > 1e-3);
}

TEST_CASE("Metropolis magnetization and specific heat on 2x2")
{
    const auto lat = ising({2, 2}, 0.4);
    const auto ex = enumerate_exact(lat);
    LatticeChainState st{ordered_config(lat), Rng(21), 0};
    std::vector<double> absm, energy;
    for (int n = 0; n < 200000; ++n) {
        metropolis_sweep(st, lat);
        absm.push_back(std::abs(magnetic_density(st.config, lat)[0]));
        energy.push_back(lattice_energy(st.config, lat));
    }
    const auto bm = batch_means(absm, 50);
    CHECK(std::abs(bm.mean - ex.mean_abs_m) < 3 * bm.stderr_);
    // Specific heat: per-batch estimates give the error.
    std::vector<double> c;
    for (int b = 0; b < 50; ++b) {
        ObservableSeries s{std::vector<double>(energy.begin() + b * 4000, energy.begin() + (b + 1) * 4000),
                           TimeUnit::MetropolisSweep, 0};
        c.push_back(specific_heat_estimate(s, 0.4));
    }
    const auto ce = mean_error(c);
    CHECK(std::abs(ce.mean - ex.specific_heat()) < 3 * ce.stderr_ + 1e-3);
}

TEST_CASE("Wolff and Swendsen-Wang agree on 16x16")
{
    const auto lat = ising({16, 16}, 0.42);
    auto run = [&](auto step, std::uint64_t seed) {
        LatticeChainState st{ordered_config(lat), Rng(seed), 0};
        for (int n = 0; n < 2000; ++n) step(st);
        std::vector<double> m;
        for (int n = 0; n < 40000; ++n) {
            step(st);
            m.push_back(std::abs(magnetic_density(st.config, lat)[0]));
        }
        return batch_means(m, 40);
    };
    const auto w = run([&](auto& s) { wolff_step(s, lat); }, 31);
    const auto sw = run([&](auto& s) { swendsen_wang_step(s, lat); }, 32);
    CHECK(std::abs(w.mean - sw.mean) < 3 * std::hypot(w.stderr_, sw.stderr_));
}

TEST_CASE("XY event chain factors")
{
    CHECK(xy_factor_rate(std::numbers::pi / 2, 0, 1, 1.5, 1.0) == doctest::Approx(1.5));
    CHECK(xy_factor_rate(-std::numbers::pi / 2, 0, 1, 1.5, 1.0) == 0);
    CHECK(xy_factor_rate(-std::numbers::pi / 2, 0, -1, 1.5, 1.0) == doctest::Approx(1.5));
    // Starting at psi = pi the rate sin(psi)^+ is zero until 2 pi; one full cycle accumulates 2.
    CHECK(xy_factor_event_delay(std::numbers::pi, 0.5) == doctest::Approx(std::numbers::pi + std::acos(0.5)));
    CHECK(xy_factor_event_delay(0, 2.0) == doctest::Approx(std::numbers::pi));
    CHECK(xy_factor_event_delay(0, 4.5) == doctest::Approx(4 * std::numbers::pi + std::acos(0.5)));
    for (double psi : {0.3, 1.7, 3.5, 5.9})
        for (double delta : {0.1, 1.0, 2.5}) {
            const double t = xy_factor_event_delay(psi, delta);
            double acc = 0;
            const int n = 200000;
            for (int k = 0; k < n; ++k) acc += std::max(0.0, std::sin(psi + (k + 0.5) * t / n)) * t / n;
            CHECK(acc == doctest::Approx(delta).epsilon(1e-6));
        }
}

TEST_CASE("two-spin XY samplers match the quadrature density")
{
    const double beta = 0.8;
    const auto lat = xy_pair(beta);
    const auto cdf = pair_angle_cdf(beta);

    LatticeChainState st{ordered_config(lat), Rng(41), 0};
    XYEventChainState chain;
    std::vector<double> ec;
    for (int n = 0; n < 40000; ++n) {
        ecmc_xy_run(st, chain, lat, 1.0);
        ec.push_back(pair_angle(st.config));
    }
    CHECK(chain.events > 0);
    CHECK(st.time == doctest::Approx(40000));
    CHECK(ks_correlated_p(ec, cdf) > 1e-3);

    LatticeChainState ms{ordered_config(lat), Rng(42), 0};
    std::vector<double> mh;
    for (int n = 0; n < 40000; ++n) {
        metropolis_sweep(ms, lat);
        mh.push_back(pair_angle(ms.config));
    }
    CHECK(ks_correlated_p(mh, cdf) > 1e-3);
}
