#include <cmath>
#include <vector>

#include <doctest.h>

#include "coalesce/dynamics.hpp"
#include "coalesce/errors.hpp"
#include "../support/stats.hpp"

using namespace coalesce;

namespace
{
Field uniform_gradient(Grid const& grid, Vec2 g)
{
    Field f;
    f.grid = grid;
    f.density.assign(grid.size(), 0.0);
    f.potential.assign(grid.size(), 0.0);
    f.grad_x.assign(grid.size(), g.x);
    f.grad_y.assign(grid.size(), g.y);
    return f;
}

std::vector<Particle> clumps(std::uint64_t seed)
{
    Stream s(seed, 0, 0);
    std::vector<Particle> ps;
    ParticleId id = 0;
    for (Vec2 c : {Vec2{-0.5, -0.4}, Vec2{0.45, 0.5}, Vec2{0.3, -0.5}})
        for (int k = 0; k < 25; ++k)
            ps.push_back({id++, c + 1e-3 * normal_pair(s), 0.02 + 0.02 * uniform01(s), 0});
    for (int k = 0; k < 50; ++k)
        ps.push_back({id++, {1.6 * uniform01(s) - 0.8, 1.6 * uniform01(s) - 0.8}, 0.01, 0});
    return ps;
}

SystemState clump_state(std::uint64_t seed)
{
    SystemState s;
    s.particles = clumps(seed);
    s.next_id = s.particles.size();
    s.params = {1, 1e-3, kLogKernelGamma};
    return s;
}
}  // namespace

TEST_SUITE("dynamics")
{
TEST_CASE("substep selection")
{
    CHECK(choose_substep(0, 1, 0.1, 1) == doctest::Approx(0.0025));
    CHECK(choose_substep(10, 0, 0.1, 1) == doctest::Approx(0.005));
    CHECK(choose_substep(10, 1, 0.1, 1) == doctest::Approx(0.0025));
    CHECK(choose_substep(0, 0, 0.1, 0.3) == 0.3);
    CHECK(choose_substep(1e300, 1e300, 1e-300, 1) > 0);
    CHECK_THROWS_AS(choose_substep(1, 1, 0, 1), DomainError);
    CHECK_THROWS_AS(choose_substep(1, 1, 0.1, 0), DomainError);
}

TEST_CASE("single substep in a zero field")
{
    auto const grid = Grid::centered(1, 11);  // dx = 0.2
    auto const f = uniform_gradient(grid, {0, 0});
    SystemParams const params{1, 1, kLogKernelGamma};
    Particle const p{7, {0.1, 0.2}, 2, 0};  // sigma = 1, (dx/2 sigma)^2 = 0.01
    Stream a(3, 7, 0);
    auto const r = advance_particle(p, 0.004, f, params, a);
    CHECK(r.ledger.substeps == 1);
    CHECK(r.ledger.elapsed == 0.004);
    Stream b(3, 7, 0);
    Vec2 const dw = std::sqrt(0.004) * normal_pair(b);
    CHECK(r.ledger.increment.x == doctest::Approx(dw.x));
    CHECK(r.position.x == doctest::Approx(0.1 + dw.x));
    CHECK(r.position.y == doctest::Approx(0.2 + dw.y));
}

TEST_CASE("deterministic limit follows the drift")
{
    auto const grid = Grid::centered(10, 101);
    auto const f = uniform_gradient(grid, {2, -1});
    SystemParams const params{3, 1e-30, kLogKernelGamma};
    Stream s(1, 0, 0);
    auto const r = advance_particle({0, {0.5, 0.5}, 1, 0}, 0.2, f, params, s);
    CHECK(r.position.x == doctest::Approx(0.5 + 3 * 2 * 0.2).epsilon(1e-9));
    CHECK(r.position.y == doctest::Approx(0.5 - 3 * 1 * 0.2).epsilon(1e-9));
    CHECK(r.ledger.substeps > 1);
    CHECK(r.ledger.elapsed == 0.2);
}

TEST_CASE("ledger and displacement statistics")
{
    auto const grid = Grid::centered(1, 21);  // dx = 0.1
    auto const f = uniform_gradient(grid, {0, 0});
    SystemParams const params{1, 0.5, kLogKernelGamma};
    double const m = 0.25;  // sigma = 2, substep 6.25e-4
    double const dt = 0.01;
    std::size_t const n = 100000;
    std::vector<double> ix, iy;
    double msd = 0;
    for (std::size_t k = 0; k < n; ++k)
    {
        Stream s(11, k, 0);
        auto const r = advance_particle({k, {0, 0}, m, 0}, dt, f, params, s);
        REQUIRE(r.ledger.elapsed == dt);
        CHECK(r.ledger.substeps >= 16);
        CHECK(r.ledger.substeps <= 17);
        ix.push_back(r.ledger.increment.x / std::sqrt(dt));
        iy.push_back(r.ledger.increment.y / std::sqrt(dt));
        msd += norm2(r.position);
    }
    auto const sx = test::summarize(ix);
    auto const sy = test::summarize(iy);
    CHECK(sx.variance == doctest::Approx(1).epsilon(0.02));
    CHECK(sy.variance == doctest::Approx(1).epsilon(0.02));
    CHECK(std::abs(sx.mean) < 0.015);
    CHECK(msd / n == doctest::Approx(4 * 0.5 / m * dt).epsilon(0.03));
}

TEST_CASE("budget exhaustion raises")
{
    auto const grid = Grid::centered(1, 21);
    auto const f = uniform_gradient(grid, {0, 0});
    SystemParams const params{1, 1, kLogKernelGamma};
    Stream s(1, 0, 0);
    CHECK_THROWS_AS(advance_particle({0, {0, 0}, 1e-6, 0}, 1, f, params, s, 10), StepError);
}

TEST_CASE("macro step conserves mass and is thread-count independent")
{
    auto const grid = Grid::centered(1, 33);
    StepOptions opt;
    opt.merge_rule = MergeRule::AnyDecrease;
    opt.seed = 21;

    auto a = clump_state(2);
    double const mass = a.total_mass();
    Stepper serial(grid, opt);
    std::size_t merges = 0;
    for (int k = 0; k < 5; ++k)
    {
        auto const rep = serial.step(a, 1e-3);
        merges += rep.merges.size();
        CHECK(rep.total_substeps >= a.particles.size());
    }
    CHECK(merges > 0);
    CHECK(a.total_mass() == doctest::Approx(mass).epsilon(1e-12));
    CHECK(a.step == 5);
    CHECK(a.time == doctest::Approx(5e-3));

    opt.threads = 3;
    auto b = clump_state(2);
    Stepper parallel(grid, opt);
    for (int k = 0; k < 5; ++k)
        parallel.step(b, 1e-3);
    REQUIRE(a.particles.size() == b.particles.size());
    for (std::size_t i = 0; i < a.particles.size(); ++i)
    {
        CHECK(a.particles[i].id == b.particles[i].id);
        CHECK(a.particles[i].position.x == b.particles[i].position.x);
        CHECK(a.particles[i].position.y == b.particles[i].position.y);
    }

    // Without clustering nothing ever merges.
    opt.detection.eta = 1e-300;
    auto c = clump_state(2);
    auto const n = c.particles.size();
    macro_step(c, 1e-3, grid, opt);
    CHECK(c.particles.size() == n);
}
}
