#include <doctest.h>

#include <cmath>
#include <limits>

#include "boltz/rng.hpp"
#include "boltz/torus.hpp"

using namespace boltz;
using V = Vec<double>;

namespace {
V v1(double a) { return (V(1) << a).finished(); }
V v2(double a, double b) { return (V(2) << a, b).finished(); }
}  // namespace

TEST_CASE("wrap")
{
    const auto t1 = Torus<double>::cube(1, 10);
    CHECK(wrap(v1(11.5), t1)[0] == doctest::Approx(1.5));
    CHECK(wrap(v1(-0.5), t1)[0] == doctest::Approx(9.5));
    const auto t2 = Torus<double>::cube(2, 10);
    CHECK(wrap(v2(3, 3), t2) == v2(3, 3));
    CHECK_THROWS_AS(wrap(v1(std::numeric_limits<double>::quiet_NaN()), t1), InvalidInput);
    CHECK(wrap(v1(-1e-18), t1)[0] < 10.0);
}

TEST_CASE("torus validation")
{
    CHECK_THROWS_AS(Torus<double>(V::Constant(4, 1.0)), InvalidInput);
    CHECK_THROWS_AS(Torus<double>(v2(1, 0)), InvalidInput);
}

TEST_CASE("minimal separation")
{
    const auto t1 = Torus<double>::cube(1, 10);
    CHECK(min_sep_vector(v1(1), v1(9), t1)[0] == doctest::Approx(2));
    CHECK(min_sep_vector(v1(4), v1(1), t1)[0] == doctest::Approx(3));
    const auto t2 = Torus<double>::cube(2, 10);
    CHECK(min_sep_vector(v2(0, 0), v2(5, 5), t2) == v2(-5, -5));
    CHECK(min_sep_vector(v2(5, 5), v2(0, 0), t2) == v2(-5, -5));
    CHECK(min_sep_distance(v1(1), v1(9), t1) == doctest::Approx(2));
    CHECK(min_sep_distance(v1(3), v1(3), t1) == 0);
    CHECK(min_sep_distance(v2(0, 0), v2(3, 4), Torus<double>::cube(2, 100)) == doctest::Approx(5));
    CHECK_THROWS_AS(min_sep_vector(v1(1), v2(1, 1), t2), InvalidInput);
}

TEST_CASE("metric properties on random points")
{
    Rng rng(7);
    const Torus<double> t((V(3) << 3.0, 5.0, 7.5).finished());
    const double bound = 0.5 * t.side_lengths().norm();
    auto point = [&] {
        V p(3);
        for (int k = 0; k < 3; ++k) p[k] = rng.uniform(-20, 20);
        return wrap(p, t);
    };
    for (int n = 0; n < 2000; ++n) {
        const V x = point(), y = point(), z = point();
        const double dxy = min_sep_distance(x, y, t);
        CHECK(dxy == doctest::Approx(min_sep_distance(y, x, t)));
        CHECK(dxy <= min_sep_distance(x, z, t) + min_sep_distance(z, y, t) + 1e-12);
        CHECK(dxy <= bound + 1e-12);
        CHECK(wrap(x, t) == x);
        const V s = min_sep_vector(x, y, t);
        for (int k = 0; k < 3; ++k) {
            CHECK(s[k] >= -t.side(k) / 2);
            CHECK(s[k] < t.side(k) / 2);
        }
    }
}
