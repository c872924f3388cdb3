#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "coalesce/diagnostics.hpp"
#include "coalesce/errors.hpp"

using namespace coalesce;
using std::numbers::pi;

TEST_SUITE("diagnostics")
{
TEST_CASE("regularized slope")
{
    double const mc = 8 * pi;
    CHECK(critical_mass(1, 1) == doctest::Approx(mc));
    CHECK(critical_mass(4, 5) == doctest::Approx(10 * pi));
    std::vector<double> none;
    CHECK(predicted_slope_regularized(6 * mc, 1, 1, none) == doctest::Approx(-20));
    std::vector<double> one{4 * mc};
    // 4 (2/6) - 24 (1 - (4/6)^2) = 4/3 - 40/3
    CHECK(predicted_slope_regularized(6 * mc, 1, 1, one) == doctest::Approx(-12));
    std::vector<double> all{6 * mc};
    CHECK(predicted_slope_regularized(6 * mc, 1, 1, all) == doctest::Approx(0).scale(1));
    CHECK(predicted_slope_regularized(mc, 1, 1, none) == doctest::Approx(0).scale(1));
    std::vector<double> too_much{7 * mc};
    CHECK_THROWS_AS(predicted_slope_regularized(6 * mc, 1, 1, too_much), DomainError);
    CHECK_THROWS_AS(predicted_slope_regularized(0, 1, 1, none), DomainError);
}

TEST_CASE("multispecies rate and critical masses")
{
    std::vector<SpeciesRate> s{{17.5, 4}, {35.0 / 12, 24}};
    double const expect = (70 - 56 / pi) * 4 + (35.0 / 3 - 56 / pi) * 24;
    CHECK(mpks_moment_rate(4, s) == doctest::Approx(expect));
    CHECK(mpks_moment_rate(4, s) == doctest::Approx(60.8901).epsilon(1e-5));
    CHECK_FALSE(mpks_blowup_condition(4, s));

    // one species: the rate is 4 mu M - chi M^2 / 2 pi, zero at 8 pi mu / chi
    std::vector<SpeciesRate> crit{{1.5, critical_mass(2, 1.5)}};
    CHECK(mpks_moment_rate(2, crit) == doctest::Approx(0).scale(100));
    std::vector<SpeciesRate> heavy{{1.5, 1.01 * critical_mass(2, 1.5)}};
    CHECK(mpks_blowup_condition(2, heavy));

    auto const [m1, m2] = mpks_m_max(100, 10, 1);
    CHECK(m1 == doctest::Approx(16 * pi / 90));
    CHECK(m2 == doctest::Approx(2 * pi / 9));
    auto const [a1, a2] = mpks_m_max(4, 17.5, 35.0 / 12);
    CHECK(a2 - a1 == doctest::Approx(2 * pi / 4 * 2 * 35.0 / 12 * 17.5 / (17.5 - 35.0 / 12)));
    CHECK_THROWS_AS(mpks_m_max(4, 1, 1), DomainError);
}

TEST_CASE("moment record")
{
    SystemState s;
    s.time = 0.75;
    s.particles = {{0, {1, 0}, 30, kMergedSpecies}, {1, {-1, 0}, 1, 0}, {2, {0, 2}, 2, 1},
                   {3, {0, 0}, 5, kMergedSpecies}};
    auto const r = record(s, 2, 8 * pi);
    CHECK(r.time == 0.75);
    CHECK(r.f_total == doctest::Approx(30 + 1 + 8));
    CHECK(r.f_species[0] == doctest::Approx(1));
    CHECK(r.f_species[1] == doctest::Approx(8));
    CHECK(r.n_particles == 4);
    CHECK(r.n_atoms == 1);
    CHECK(r.atom_mass_total == 30);

    double const m = 38;
    Vec2 const cm{29 / m, 4 / m};
    double y = 0;
    for (auto const& p : s.particles)
        y += p.mass * norm2(p.position - cm);
    CHECK(r.y_norm == doctest::Approx(y / m));
}

TEST_CASE("line fit")
{
    std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    auto const f = fit_line(x, y);
    CHECK(f.slope == doctest::Approx(2));
    CHECK(f.intercept == doctest::Approx(1));
    CHECK(f.r2 == doctest::Approx(1));
    std::vector<double> noisy{1, 2, 1, 2};
    CHECK(fit_line(x, noisy).r2 == doctest::Approx(0.2));
    std::vector<double> flat{2, 2, 2, 2};
    CHECK_THROWS_AS(fit_line(flat, y), DomainError);
    CHECK_THROWS_AS(fit_line(std::vector<double>{1}, std::vector<double>{1}), DomainError);
}

TEST_CASE("series round trip")
{
    std::vector<MomentRecord> rs(3);
    for (std::size_t k = 0; k < rs.size(); ++k)
    {
        rs[k].time = 0.1 * k;
        rs[k].y_norm = 1.0 / (k + 3);
        rs[k].f_total = 7.25 - k;
        rs[k].f_species = {0.5 * k, 1e-17, 2};
        rs[k].n_particles = 100 - k;
        rs[k].n_atoms = k;
        rs[k].atom_mass_total = k * pi;
    }
    auto const path = std::filesystem::temp_directory_path() / "coalesce_series_test.csv";
    write_series(path, rs, 3);
    {
        std::ifstream in(path);
        std::string header;
        std::getline(in, header);
        CHECK(header
              == "t,Y_norm,F_total,F_species_1,F_species_2,F_species_3,n_particles,n_atoms,"
                 "atom_mass_total");
    }
    auto const back = read_series(path);
    REQUIRE(back.size() == 3);
    for (std::size_t k = 0; k < 3; ++k)
    {
        CHECK(back[k].time == rs[k].time);
        CHECK(back[k].y_norm == rs[k].y_norm);
        CHECK(back[k].f_total == rs[k].f_total);
        CHECK(back[k].f_species == rs[k].f_species);
        CHECK(back[k].n_particles == rs[k].n_particles);
        CHECK(back[k].n_atoms == rs[k].n_atoms);
        CHECK(back[k].atom_mass_total == rs[k].atom_mass_total);
    }
    std::filesystem::remove(path);
}
}
