#include <cmath>
#include <numbers>
#include <tuple>
#include <vector>

#include <doctest.h>

#include "coalesce/bessel.hpp"
#include "coalesce/errors.hpp"
#include "coalesce/model.hpp"
#include "coalesce/random.hpp"

using namespace coalesce;
using std::numbers::pi;

namespace
{
std::vector<Particle> random_particles(std::size_t n, std::uint64_t seed)
{
    Stream g(seed, 0, 0);
    std::vector<Particle> ps;
    for (std::size_t i = 0; i < n; ++i)
        ps.push_back({i, {4 * uniform01(g) - 2, 4 * uniform01(g) - 2}, 0.1 + uniform01(g), 0});
    return ps;
}

// Pairwise form, independent of the centered implementation.
double pairwise_second_moment(std::vector<Particle> const& ps)
{
    double m = 0, s = 0;
    for (auto const& a : ps)
    {
        m += a.mass;
        for (auto const& b : ps)
            s += a.mass * b.mass * norm2(a.position - b.position);
    }
    return s / (2 * m * m);
}
}  // namespace

TEST_SUITE("model")
{
TEST_CASE("noise amplitude")
{
    SystemParams p{1, 2, kLogKernelGamma};
    CHECK(sigma_of_mass(1, p) == doctest::Approx(2));
    CHECK(sigma_of_mass(4, p) == doctest::Approx(1));
    CHECK(sigma_of_mass(2, p) == doctest::Approx(sigma_of_mass(1, p) / std::sqrt(2.0)));
    CHECK_THROWS_AS(sigma_of_mass(0, p), DomainError);
    CHECK_THROWS_AS(sigma_of_mass(-1, p), DomainError);
}

TEST_CASE("second moment matches the pairwise form")
{
    auto ps = random_particles(40, 1);
    double const y = system_second_moment(ps);
    CHECK(y == doctest::Approx(pairwise_second_moment(ps)).epsilon(1e-12));

    // translation invariance and quadratic dilation
    auto moved = ps;
    for (auto& p : moved)
        p.position = 3.0 * p.position + Vec2{5, -7};
    CHECK(system_second_moment(moved) == doctest::Approx(9 * y).epsilon(1e-12));
}

TEST_CASE("center of mass")
{
    auto ps = random_particles(25, 2);
    Vec2 const c = center_of_mass(ps);
    auto shifted = ps;
    for (auto& p : shifted)
    {
        p.position += Vec2{1.5, -0.5};
        p.mass *= 3;
    }
    Vec2 const c2 = center_of_mass(shifted);
    CHECK(c2.x == doctest::Approx(c.x + 1.5).epsilon(1e-12));
    CHECK(c2.y == doctest::Approx(c.y - 0.5).epsilon(1e-12));
    CHECK(total_mass(shifted) == doctest::Approx(3 * total_mass(ps)).epsilon(1e-12));
}

TEST_CASE("pks map")
{
    auto const s = pks_to_particles(1, 1, 48 * pi, 40000);
    CHECK(s.params.mu_tilde == doctest::Approx(48 * pi / 40000).epsilon(1e-14));
    REQUIRE(s.species.size() == 1);
    CHECK(s.species[0].count == 40000);
    CHECK(s.species[0].particle_mass == doctest::Approx(48 * pi / 40000).epsilon(1e-14));

    for (auto [chi, mu, m, n] : {std::tuple{1.0, 1.0, 48 * pi, 1000ul},
                                 std::tuple{2.0, 0.5, 3.0, 17ul},
                                 std::tuple{0.3, 4.0, 100.0, 5ul}})
    {
        auto const setup = pks_to_particles(chi, mu, m, n);
        std::vector<double> masses(n, setup.species[0].particle_mass);
        double const nu = bessel_index(masses, setup.params);
        double const expect = (n - 1.0) * (1 - chi * m / (8 * pi * mu)) - 1;
        CHECK(nu == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("mpks map")
{
    std::vector<Species> sp{{4, 35.0 / 2}, {24, 35.0 / 12}};
    auto const s = mpks_to_particles(4, sp, 100000);
    CHECK(s.mu == doctest::Approx(5).epsilon(1e-14));
    CHECK(s.species[0].eta == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s.species[1].eta == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(s.species[0].count + s.species[1].count == 100000);
    CHECK(s.params.mu_tilde == doctest::Approx(5.0 * 28 / 100000).epsilon(1e-14));
    for (std::size_t i = 0; i < 2; ++i)
        CHECK(recovered_species_mu(s, i) == doctest::Approx(sp[i].mu).epsilon(1e-12));

    // K = 1 reduces to the pks map
    std::vector<Species> one{{10, 2}};
    auto const a = mpks_to_particles(3, one, 77);
    auto const b = pks_to_particles(3, 2, 10, 77);
    CHECK(a.params.mu_tilde == doctest::Approx(b.params.mu_tilde).epsilon(1e-15));
    CHECK(a.species[0].particle_mass == doctest::Approx(b.species[0].particle_mass).epsilon(1e-15));

    // a species whose share rounds to zero particles
    std::vector<Species> tiny{{1, 1}, {1e-9, 1}};
    CHECK_THROWS_AS(mpks_to_particles(1, tiny, 10), ConfigError);
}

TEST_CASE("largest remainder apportionment")
{
    std::vector<double> w{1, 1, 1};
    auto c = apportion(w, 10);
    CHECK(c == std::vector<std::size_t>{4, 3, 3});
    std::vector<double> w2{0.6, 0.3, 0.1};
    CHECK(apportion(w2, 7) == std::vector<std::size_t>{4, 2, 1});
}
}
