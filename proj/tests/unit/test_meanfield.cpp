#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "coalesce/errors.hpp"
#include "coalesce/meanfield.hpp"
#include "coalesce/random.hpp"

using namespace coalesce;
using std::numbers::pi;

namespace
{
double max_rel_error_point_mass(std::size_t n)
{
    auto const grid = Grid::centered(1, n);
    std::vector<Particle> ps{{0, {0, 0}, 2 * pi, 0}};
    auto const f = build_field(ps, grid);
    double err = 0;
    for (std::size_t j = 0; j < grid.ny(); ++j)
        for (std::size_t i = 0; i < grid.nx(); ++i)
        {
            double const r = norm(grid.node(i, j));
            if (r < 0.25 || r > 0.8)
                continue;
            double const exact = -std::log(r);
            err = std::max(err, std::abs(f.potential[grid.index(i, j)] - exact) / std::abs(exact));
        }
    return err;
}
}  // namespace

TEST_SUITE("meanfield")
{
TEST_CASE("grid geometry")
{
    auto const g = Grid::square_cells(-1, 3, 0, 2, 5);
    CHECK(g.dx() == doctest::Approx(1));
    CHECK(g.ny() == 3);
    CHECK(g.node(4, 2).x == doctest::Approx(3));
    CHECK(g.on_boundary(0, 1));
    CHECK_FALSE(g.on_boundary(1, 1));
    CHECK_THROWS_AS(Grid::square_cells(0, 1, 0, 0.55, 11), ConfigError);
    CHECK_THROWS_AS(Grid::square_cells(0, 1, 0, 1, 2), ConfigError);
}

TEST_CASE("deposition")
{
    auto const g = Grid::square_cells(0, 4, 0, 4, 5);  // dx = 1
    std::vector<Particle> on_node{{0, {2, 1}, 4, 0}};
    auto rho = deposit_mass(on_node, g);
    CHECK(rho[g.index(2, 1)] == doctest::Approx(4));
    CHECK(rho[g.index(3, 1)] == 0);
    CHECK(rho[g.index(2, 2)] == 0);

    std::vector<Particle> centre{{0, {1.5, 2.5}, 2, 0}};
    rho = deposit_mass(centre, g);
    for (auto [i, j] : {std::pair{1, 2}, {2, 2}, {1, 3}, {2, 3}})
        CHECK(rho[g.index(i, j)] == doctest::Approx(0.5));

    // partition of unity, and out-of-domain mass is skipped
    auto const g2 = Grid::square_cells(-1, 1, -1, 1, 33);
    Stream s(1, 0, 0);
    std::vector<Particle> many;
    double inside = 0;
    for (std::size_t k = 0; k < 1000; ++k)
    {
        Particle p{k, {3 * uniform01(s) - 1.5, 3 * uniform01(s) - 1.5}, uniform01(s), 0};
        if (g2.contains(p.position))
            inside += p.mass;
        many.push_back(p);
    }
    rho = deposit_mass(many, g2);
    double sum = 0;
    for (double v : rho)
        sum += v * g2.dx() * g2.dx();
    CHECK(sum == doctest::Approx(inside).epsilon(1e-10));
}

TEST_CASE("solver")
{
    auto const g = Grid::centered(1, 33);
    std::vector<double> zero(g.size(), 0.0);
    auto c = solve_field(zero, g, 0, {0, 0});
    for (double v : c)
        CHECK(v == 0);

    // point mass: potential close to the fundamental solution
    CHECK(max_rel_error_point_mass(129) <= 0.05);

    // residual bound after a solve
    std::vector<Particle> ps{{0, {0.1, -0.2}, 1, 0}, {1, {-0.3, 0.25}, 2, 0}};
    SolveReport rep;
    auto const f = build_field(ps, g, kLogKernelGamma, {}, {}, &rep);
    double pmax = 0;
    for (double v : f.density)
        pmax = std::max(pmax, std::abs(v));
    CHECK(poisson_residual(f.potential, f.density, g) <= 1e-8 * pmax * 1.0000001);
    CHECK(rep.residual <= 1e-8);
    CHECK(rep.iterations > 0);

    // translation equivariance: particle and domain shifted together
    auto const g_shift = Grid::square_cells(1, 3, -4, -2, 33);
    auto ps_shift = ps;
    for (auto& p : ps_shift)
        p.position += Vec2{2, -3};
    auto const f2 = build_field(ps_shift, g_shift);
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(f2.potential[k] == doctest::Approx(f.potential[k]).epsilon(1e-6).scale(1));

    std::vector<double> wrong(5, 0.0);
    CHECK_THROWS_AS(solve_field(wrong, g, 0, {0, 0}), DomainError);
}

TEST_CASE("gradient stencils")
{
    auto const g = Grid::square_cells(-1, 1, -1, 1, 21);
    std::vector<double> lin(g.size()), quad(g.size()), cst(g.size(), 3.0);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i)
        {
            auto const x = g.node(i, j);
            lin[g.index(i, j)] = 2.5 * x.x - x.y;
            quad[g.index(i, j)] = x.x * x.x;
        }
    std::vector<double> gx, gy;
    gradient_field(lin, g, gx, gy);
    for (std::size_t k = 0; k < g.size(); ++k)
    {
        CHECK(gx[k] == doctest::Approx(2.5));
        CHECK(gy[k] == doctest::Approx(-1));
    }
    gradient_field(quad, g, gx, gy);
    for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t i = 0; i < g.nx(); ++i)
            CHECK(gx[g.index(i, j)] == doctest::Approx(2 * g.node(i, j).x).scale(1));
    gradient_field(cst, g, gx, gy);
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(std::abs(gx[k]) + std::abs(gy[k]) < 1e-12);
}

TEST_CASE("gradient sampling")
{
    auto const g = Grid::centered(1, 65);
    std::vector<Particle> ps{{0, {0, 0}, 2 * pi, 0}};
    auto const f = build_field(ps, g);

    // outside: monopole far field
    auto const far = sample_gradient({2, 0}, f);
    CHECK(far.x == doctest::Approx(-0.5));
    CHECK(far.y == doctest::Approx(0).scale(1));
    auto const edge = sample_gradient({-1 - 1e-9, 0}, f);
    CHECK(edge.x == doctest::Approx(1).epsilon(1e-6));

    // exactly on a node: that node's values
    auto const node = sample_gradient(g.node(40, 17), f);
    CHECK(node.x == doctest::Approx(f.grad_x[g.index(40, 17)]));
    CHECK(node.y == doctest::Approx(f.grad_y[g.index(40, 17)]));

    // points at least two cells away are pulled toward the mass
    Stream s(2, 0, 0);
    int checked = 0;
    while (checked < 100)
    {
        Vec2 const x{2 * uniform01(s) - 1, 2 * uniform01(s) - 1};
        if (norm(x) < 2 * g.dx())
            continue;
        CHECK(dot(sample_gradient(x, f), x) < 0);
        ++checked;
    }

    Field bad = f;
    bad.center_of_mass = {3, 3};
    CHECK_THROWS_AS(sample_gradient({3, 3}, bad), DomainError);
}

TEST_CASE("snapshot round trip")
{
    auto const g = Grid::square_cells(0, 1, 0, 2, 4);
    std::vector<double> v(g.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        v[k] = std::sin(static_cast<double>(k)) * 1e-3 + k;
    auto const path = std::filesystem::temp_directory_path() / "coalesce_matrix_test.txt";
    write_matrix(path, v, g);
    CHECK(read_matrix(path, g) == v);
    std::filesystem::remove(path);
}
}
