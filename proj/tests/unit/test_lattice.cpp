#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "boltz/analytic.hpp"
#include "boltz/errors.hpp"
#include "boltz/lattice.hpp"
#include "boltz/rng.hpp"

using namespace boltz;

namespace {

Lattice make(LatticeModel m, std::vector<int> dims, double J = 1, double h = 0, int q = 2)
{
    LatticeSpec s;
    s.model = m;
    s.dims = std::move(dims);
    s.J = J;
    s.h = h;
    s.q = q;
    return Lattice(s);
}

LatticeConfig random_config(const Lattice& lat, Rng& rng)
{
    LatticeConfig c;
    c.spins.resize(static_cast<Eigen::Index>(lat.size()));
    for (Eigen::Index i = 0; i < c.spins.size(); ++i) {
        switch (lat.spec().model) {
        case LatticeModel::Ising: c.spins[i] = rng.coin(0.5) ? 1 : -1; break;
        case LatticeModel::Potts: c.spins[i] = 1 + static_cast<double>(rng.index(lat.spec().q)); break;
        case LatticeModel::XY: c.spins[i] = rng.uniform(0, 2 * std::numbers::pi); break;
        }
    }
    return c;
}

}  // namespace

TEST_CASE("spec validation")
{
    LatticeSpec s;
    s.dims = {1, 4};
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s.dims = {4, 4};
    s.beta = -1;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
    s.beta = 1;
    s.model = LatticeModel::Potts;
    s.q = 1;
    CHECK_THROWS_AS(s.validate(), InvalidInput);
}

TEST_CASE("neighbour table")
{
    const NeighborTable nb({4, 3});
    CHECK(nb.degree() == 4);
    for (std::size_t i = 0; i < nb.sites(); ++i)
        for (int k = 0; k < nb.degree(); ++k) {
            const int j = nb[i][k];
            bool back = false;
            for (int l = 0; l < nb.degree(); ++l) back |= nb[j][l] == static_cast<int>(i);
            CHECK(back);
        }
    CHECK(nb.edges().size() == 2 * 12);
}

TEST_CASE("lattice energies")
{
    const auto ring = make(LatticeModel::Ising, {2});
    CHECK(lattice_energy(ordered_config(ring), ring) == doctest::Approx(-2));

    const auto xy = make(LatticeModel::XY, {4, 4});
    LatticeConfig c;
    c.spins = Eigen::VectorXd::Constant(16, 1.3);
    CHECK(lattice_energy(c, xy) == doctest::Approx(-32));

    Rng rng(3);
    const auto is = make(LatticeModel::Ising, {5, 4});
    for (int n = 0; n < 20; ++n) {
        auto cfg = random_config(is, rng);
        const double u = lattice_energy(cfg, is);
        cfg.spins = -cfg.spins;
        CHECK(lattice_energy(cfg, is) == doctest::Approx(u));
    }
    for (int n = 0; n < 20; ++n) {
        auto cfg = random_config(xy, rng);
        const double u = lattice_energy(cfg, xy);
        for (Eigen::Index i = 0; i < cfg.spins.size(); ++i) cfg.spins[i] = reduce_angle(cfg.spins[i] + 0.77);
        CHECK(std::abs(lattice_energy(cfg, xy) - u) < 1e-9);
    }
    LatticeConfig bad;
    bad.spins = Eigen::VectorXd::Constant(20, 0.5);
    CHECK_THROWS_AS(lattice_energy(bad, is), InvalidState);
}

TEST_CASE("local energy delta")
{
    const auto is = make(LatticeModel::Ising, {4, 4});
    auto c = ordered_config(is);
    CHECK(local_energy_delta(c, 5, -1, is) == doctest::Approx(8));
    // Neighbours of site 5 in a 4x4 lattice: 4, 6, 1, 9.
    c.spins[4] = -1;
    c.spins[1] = -1;
    CHECK(local_energy_delta(c, 5, -1, is) == doctest::Approx(0));

    Rng rng(11);
    std::vector<Lattice> lats = {make(LatticeModel::Ising, {3, 4}, 1.0, 0.3), make(LatticeModel::Ising, {2, 2}, 0.7, -0.2),
                                 make(LatticeModel::Potts, {3, 3}, 1.0, 0, 4), make(LatticeModel::XY, {4, 2, 3}, 0.9),
                                 make(LatticeModel::Ising, {2})};
    LatticeSpec xs = lats[3].spec();
    xs.h_xy = {0.3, -0.4};
    lats.emplace_back(xs);
    for (const auto& lat : lats)
        for (int n = 0; n < 200; ++n) {
            auto cfg = random_config(lat, rng);
            const std::size_t site = rng.index(lat.size());
            const auto proposal = random_config(lat, rng).spins[static_cast<Eigen::Index>(site)];
            const double before = lattice_energy(cfg, lat);
            const double delta = local_energy_delta(cfg, site, proposal, lat);
            cfg.spins[static_cast<Eigen::Index>(site)] = proposal;
            const double after = lattice_energy(cfg, lat);
            CHECK(std::abs(delta - (after - before)) <= 1e-10 * std::max(1.0, std::abs(after)));
        }
}

TEST_CASE("magnetic density")
{
    const auto is = make(LatticeModel::Ising, {4});
    auto c = ordered_config(is);
    CHECK(magnetic_density(c, is)[0] == 1);
    c.spins << 1, -1, 1, -1;
    CHECK(magnetic_density(c, is)[0] == 0);
    const auto xy = make(LatticeModel::XY, {2, 2});
    LatticeConfig a;
    a.spins = Eigen::VectorXd::Constant(4, std::numbers::pi / 2);
    CHECK(std::abs(magnetic_density(a, xy)[0]) < 1e-15);
    CHECK(magnetic_density(a, xy)[1] == doctest::Approx(1));
}

TEST_CASE("two-state Potts matches Ising at doubled coupling")
{
    LatticeSpec ps;
    ps.model = LatticeModel::Potts;
    ps.q = 2;
    ps.dims = {2, 2};
    ps.beta = 0.8;
    LatticeSpec is = ps;
    is.model = LatticeModel::Ising;
    is.beta = 0.4;
    const auto ep = enumerate_exact(Lattice(ps));
    const auto ei = enumerate_exact(Lattice(is));
    REQUIRE(ep.count() == ei.count());
    // Potts digit 0 is value 1, Ising digit 0 is +1: the same labelling.
    CHECK((ep.probabilities - ei.probabilities).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("snapshot round trip")
{
    Rng rng(5);
    for (auto m : {LatticeModel::Ising, LatticeModel::Potts, LatticeModel::XY}) {
        const auto lat = make(m, {3, 5}, 1, 0, 3);
        const auto c = random_config(lat, rng);
        std::stringstream ss;
        write_snapshot(ss, c, lat.spec());
        const auto back = read_snapshot(ss, lat.spec());
        CHECK(back.spins == c.spins);
    }
    const auto lat = make(LatticeModel::Ising, {2, 2});
    std::stringstream ss;
    write_snapshot(ss, ordered_config(lat), lat.spec());
    LatticeSpec other = lat.spec();
    other.beta = 2;
    CHECK_THROWS_AS(read_snapshot(ss, other), InvalidInput);
}
