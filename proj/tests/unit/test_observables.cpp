#include <doctest.h>

#include <cmath>
#include <numbers>

#include "boltz/errors.hpp"
#include "boltz/observables.hpp"
#include "boltz/rng.hpp"

using namespace boltz;

namespace {

constexpr double pi = std::numbers::pi;

/// Perfect triangular lattice with spacing a; rows must be even to fit the torus.
std::pair<Positions, Torus<double>> triangular(int cols, int rows, double a)
{
    const double h = a * std::sqrt(3.0) / 2;
    Positions x(2, cols * rows);
    for (int j = 0; j < rows; ++j)
        for (int i = 0; i < cols; ++i) x.col(j * cols + i) << a * (i + 0.5 * (j % 2)), h * j;
    Eigen::Vector2d sides(cols * a, rows * h);
    return {x, Torus<double>(sides)};
}

Positions uniform_points(int n, double L, Rng& rng)
{
    Positions x(2, n);
    for (Eigen::Index i = 0; i < n; ++i) x.col(i) << rng.uniform(0, L), rng.uniform(0, L);
    return x;
}

Positions rotated(const Positions& x, double theta, const Eigen::Vector2d& centre)
{
    Eigen::Matrix2d R;
    R << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return (R * (x.colwise() - centre)).colwise() + centre;
}

DiskSpec disks(int n, double L, double sigma)
{
    DiskSpec s;
    s.torus = Torus<double>::cube(2, L);
    s.n = n;
    s.potential = HardDisk<double>{sigma};
    return s;
}

}  // namespace

TEST_CASE("neighbour sets")
{
    const auto box = Torus<double>::cube(2, 10);
    Positions two(2, 2);
    two << 1, 3, 1, 1;
    const auto nb2 = neighbor_sets(two, box);
    CHECK(nb2[0] == std::vector<int>{1});
    CHECK(nb2[1] == std::vector<int>{0});

    Positions line(2, 3);
    line << 1, 2, 3, 5, 5, 5;
    const auto nb3 = neighbor_sets(line, box);
    CHECK(nb3[0] == std::vector<int>{1});
    CHECK(nb3[2] == std::vector<int>{1});
    CHECK(nb3[1].size() == 2);

    const auto [x, torus] = triangular(6, 6, 1.0);
    for (const auto& s : neighbor_sets(x, torus)) CHECK(s.size() == 6);
}

TEST_CASE("local orientation")
{
    const auto [x, torus] = triangular(8, 8, 1.3);
    for (const auto& p : local_orientation(x, torus)) {
        REQUIRE(p);
        CHECK(std::abs(*p - 1.0) < 1e-12);
    }

    Rng rng(2);
    const auto big = Torus<double>::cube(2, 100);
    Positions cluster(2, 25);
    for (Eigen::Index i = 0; i < cluster.cols(); ++i) {
        const double r = 5 * std::sqrt(rng.uniform()), t = 2 * pi * rng.uniform();
        cluster.col(i) << 50 + r * std::cos(t), 50 + r * std::sin(t);
    }
    const Eigen::Vector2d centre(50, 50);
    const auto psi = local_orientation(cluster, big);
    const auto sixth = local_orientation(rotated(cluster, pi / 3, centre), big);
    const double theta = 0.37;
    const auto turned = local_orientation(rotated(cluster, theta, centre), big);
    double mean_sq = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        REQUIRE(psi[i]);
        CHECK(std::abs(*sixth[i] - *psi[i]) < 1e-9);
        CHECK(std::abs(*turned[i] - *psi[i] * std::polar(1.0, 6 * theta)) < 1e-9);
        mean_sq += std::norm(*psi[i]) / psi.size();
    }
    CHECK(mean_sq < 0.6);

    Positions lone(2, 1);
    lone << 1, 1;
    CHECK_FALSE(local_orientation(lone, big)[0]);
}

TEST_CASE("disk area on a torus")
{
    const auto sq = Torus<double>::cube(2, 2);
    CHECK(torus_disk_area(0.7, sq) == doctest::Approx(pi * 0.49));
    const double r = 1.2;
    const double clipped = pi * r * r - 4 * (r * r * std::acos(1 / r) - std::sqrt(r * r - 1));
    CHECK(torus_disk_area(r, sq) == doctest::Approx(clipped));
    CHECK(torus_disk_area(1.5, sq) == doctest::Approx(4));
    CHECK(torus_annulus_area(0.5, 0.7, sq) == doctest::Approx(pi * (0.49 - 0.25)));

    // Monte Carlo check on a rectangle.
    const Torus<double> rect(Eigen::Vector2d(3, 2));
    Rng rng(5);
    int inside = 0;
    const int draws = 400000;
    for (int k = 0; k < draws; ++k) {
        Eigen::Vector2d s(rng.uniform(-1.5, 1.5), rng.uniform(-1, 1));
        inside += s.norm() < 1.3;
    }
    const double p = torus_disk_area(1.3, rect) / 6;
    CHECK(std::abs(double(inside) / draws - p) < 4 * std::sqrt(p * (1 - p) / draws));
}

TEST_CASE("positional correlation of an ideal gas follows the annulus area")
{
    Rng rng(7);
    const double L = 10;
    const auto box = Torus<double>::cube(2, L);
    std::vector<Positions> ens;
    for (int k = 0; k < 200; ++k) ens.push_back(uniform_points(50, L, rng));
    const std::vector<double> r{0.5, 1, 2, 3, 4.5, 6};
    const double h = 0.05;
    const auto g = positional_correlation(ens, box, r, h);
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double expected = 50 * 49 / 2.0 * torus_annulus_area(r[k] - h, r[k] + h, box) / (L * L) * ens.size();
        const double seen = g.pair_counts[k] * ens.size();
        CHECK(std::abs(seen - expected) < 4 * std::sqrt(expected));
        REQUIRE(g.values[k]);
    }
    CHECK_THROWS_AS(positional_correlation(ens, box, std::vector<double>{1, 1.05}, 0.05), InvalidInput);
    CHECK_THROWS_AS(positional_correlation(ens, box, std::vector<double>{0.01}, 0.05), InvalidInput);
}

TEST_CASE("correlations of a triangular lattice")
{
    const auto [x, torus] = triangular(8, 8, 1.0);
    const std::vector<Positions> ens{x};
    const std::vector<double> r{0.7, 1, std::sqrt(3.0), 2};
    const auto gp = positional_correlation(ens, torus, r, 0.01);
    CHECK_FALSE(gp.values[0]);
    CHECK(gp.pair_counts[1] == doctest::Approx(3 * 64));
    CHECK(gp.pair_counts[2] == doctest::Approx(3 * 64));
    CHECK(gp.pair_counts[3] == doctest::Approx(3 * 64));

    const auto go = orientational_correlation(ens, torus, r, 0.01);
    CHECK_FALSE(go.values[0]);
    for (std::size_t k = 1; k < r.size(); ++k) CHECK(*go.values[k] / go.pair_counts[k] == doctest::Approx(1));
    CHECK(go.excluded == 0);

    // Global rotation leaves both curves unchanged.
    Rng rng(3);
    const auto big = Torus<double>::cube(2, 200);
    std::vector<Positions> gas, turned;
    for (int k = 0; k < 5; ++k) {
        Positions blob = uniform_points(40, 10, rng).array() + 95;
        gas.push_back(blob);
        turned.push_back(rotated(blob, 0.9, Eigen::Vector2d(100, 100)));
    }
    const auto grid = log_grid(0.3, 8, 12);
    const auto a = orientational_correlation(gas, big, grid, 0.05), b = orientational_correlation(turned, big, grid, 0.05);
    const auto pa = positional_correlation(gas, big, grid, 0.05), pb = positional_correlation(turned, big, grid, 0.05);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        CHECK(a.values[k].has_value() == b.values[k].has_value());
        if (a.values[k]) CHECK(std::abs(*a.values[k] - *b.values[k]) < 1e-9);
        CHECK(pa.pair_counts[k] == pb.pair_counts[k]);
    }
}

TEST_CASE("log grid")
{
    const auto g = log_grid(1, 100, 3);
    REQUIRE(g.size() == 3);
    CHECK(g[0] == doctest::Approx(1));
    CHECK(g[1] == doctest::Approx(10));
    CHECK(g[2] == doctest::Approx(100));
}

TEST_CASE("pressure of two disks")
{
    const double L = 10, sigma = 1;
    const auto spec = disks(2, L, sigma);
    const double V = L * L;
    const double exact = 1 / V + 1 / (V - 4 * pi * sigma * sigma);
    Rng rng(13);
    std::vector<std::vector<Positions>> chains(8);
    for (auto& c : chains) {
        while (c.size() < 40000) {
            Positions x = uniform_points(2, L, rng);
            if (min_sep_distance(Eigen::Vector2d(x.col(0)), Eigen::Vector2d(x.col(1)), spec.torus) >= 2 * sigma)
                c.push_back(x);
        }
    }
    const auto est = pressure_estimate(chains, spec);
    CHECK(est.chains == 8);
    CHECK(est.contact_pairs >= 100);
    CHECK(std::abs(est.beta_p - exact) < 4 * est.stderr_);
    CHECK(std::abs(est.beta_p - exact) < 0.03 * exact);
    CHECK(est.contact_g == doctest::Approx(V / (2 * (V - 4 * pi))).epsilon(0.1));

    std::vector<std::vector<Positions>> few{std::vector<Positions>(chains[0].begin(), chains[0].begin() + 20)};
    CHECK_THROWS_AS(pressure_estimate(few, spec), InsufficientData);
}

TEST_CASE("specific heat estimate")
{
    ObservableSeries s;
    s.values = {100, -100, 1, 2, 3, 4};
    s.burn_in = 2;
    CHECK(s.kept().size() == 4);
    CHECK(specific_heat_estimate(s, 2.0) == doctest::Approx(4 * 5.0 / 3));
    CHECK(time_unit_from_string(to_string(TimeUnit::EcmcEventTime)) == TimeUnit::EcmcEventTime);
}
