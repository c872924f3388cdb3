#include "coalesce/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "coalesce/errors.hpp"
#include "coalesce/format.hpp"

namespace coalesce
{
double critical_mass(double chi, double mu)
{
    if (!(chi > 0) || !(mu > 0))
        throw DomainError("critical_mass: chi and mu must be positive");
    return 8 * std::numbers::pi * mu / chi;
}

MomentRecord record(SystemState const& state, std::size_t species_count,
                    double atom_threshold)
{
    MomentRecord r;
    r.time = state.time;
    r.n_particles = state.particles.size();
    r.f_species.assign(species_count, 0.0);
    r.y_norm = system_second_moment(state.particles);
    for (auto const& p : state.particles)
    {
        double const f = p.mass * norm2(p.position);
        r.f_total += f;
        if (p.species >= 0 && static_cast<std::size_t>(p.species) < species_count)
            r.f_species[p.species] += f;
        if (p.merged() && p.mass > atom_threshold)
        {
            ++r.n_atoms;
            r.atom_mass_total += p.mass;
            r.atom_masses.push_back(p.mass);
        }
    }
    return r;
}

double predicted_slope_regularized(double total_mass, double mu, double chi,
                                   std::span<double const> atom_masses)
{
    if (!(total_mass > 0))
        throw DomainError("predicted_slope_regularized: total mass must be positive");
    double atoms = 0;
    double sum_sq = 0;
    for (double m : atom_masses)
    {
        if (!(m > 0))
            throw DomainError("predicted_slope_regularized: atom masses must be positive");
        atoms += m;
        sum_sq += (m / total_mass) * (m / total_mass);
    }
    if (atoms > total_mass * (1 + 1e-12))
        throw DomainError("predicted_slope_regularized: atoms exceed the total mass");
    double const regular = std::max(0.0, total_mass - atoms);
    return 4 * mu * regular / total_mass
           - chi * total_mass / (2 * std::numbers::pi) * (1 - sum_sq);
}

double mpks_moment_rate(double chi, std::span<SpeciesRate const> species)
{
    double mass = 0;
    for (auto const& s : species)
    {
        if (!(s.mass > 0))
            throw DomainError("mpks_moment_rate: species masses must be positive");
        mass += s.mass;
    }
    double const pull = chi * mass / (2 * std::numbers::pi);
    double rate = 0;
    for (auto const& s : species)
        rate += (4 * s.mu - pull) * s.mass;
    return rate;
}

bool mpks_blowup_condition(double chi, std::span<SpeciesRate const> species)
{
    return mpks_moment_rate(chi, species) < 0;
}

std::pair<double, double> mpks_m_max(double chi, double mu1, double mu2)
{
    if (!(chi > 0) || !(mu2 > 0))
        throw DomainError("mpks_m_max: chi and mu2 must be positive");
    if (!(mu1 > 2 * mu2))
        throw DomainError("mpks_m_max: requires mu1 > 2 mu2");
    double const scale = 2 * std::numbers::pi / chi;
    return {scale * (mu1 - 2 * mu2) * mu1 / (mu1 - mu2), scale * mu1 * mu1 / (mu1 - mu2)};
}

LineFit fit_line(std::span<double const> x, std::span<double const> y)
{
    if (x.size() != y.size())
        throw DomainError("fit_line: x and y differ in length");
    if (x.size() < 2)
        throw DomainError("fit_line: need at least two points");
    double const n = static_cast<double>(x.size());
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0;
    double sxy = 0;
    double syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0))
        throw DomainError("fit_line: x values are all equal");
    LineFit fit;
    fit.n = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

//---------------------------------------------------------------------------//
// Series files
//---------------------------------------------------------------------------//
void write_series_header(std::ostream& out, std::size_t species_count)
{
    out << "t,Y_norm,F_total";
    for (std::size_t k = 0; k < species_count; ++k)
        out << ",F_species_" << k + 1;
    out << ",n_particles,n_atoms,atom_mass_total\n";
}

void write_series_row(std::ostream& out, MomentRecord const& r)
{
    std::string line = format_double(r.time);
    for (double v : {r.y_norm, r.f_total})
    {
        line += ',';
        line += format_double(v);
    }
    for (double v : r.f_species)
    {
        line += ',';
        line += format_double(v);
    }
    line += ',' + std::to_string(r.n_particles);
    line += ',' + std::to_string(r.n_atoms);
    line += ',' + format_double(r.atom_mass_total);
    line += '\n';
    out << line;
}

void write_series(std::filesystem::path const& path, std::span<MomentRecord const> records,
                  std::size_t species_count)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write series", path.string());
    write_series_header(out, species_count);
    for (auto const& r : records)
        write_series_row(out, r);
    if (!out)
        throw IoError("failed while writing series", path.string());
}

std::vector<MomentRecord> read_series(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open series", path.string());
    auto split = [](std::string const& line) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        return fields;
    };
    std::string line;
    if (!std::getline(in, line))
        throw IoError("empty series file", path.string());
    auto const header = split(line);
    if (header.size() < 6 || header[0] != "t")
        throw IoError("unrecognized series header", path.string());
    std::size_t const species = header.size() - 6;

    std::vector<MomentRecord> records;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        auto const f = split(line);
        if (f.size() != header.size())
            throw IoError("malformed series row '" + line + "'", path.string());
        MomentRecord r;
        r.time = parse_double(f[0], "t");
        r.y_norm = parse_double(f[1], "Y_norm");
        r.f_total = parse_double(f[2], "F_total");
        for (std::size_t k = 0; k < species; ++k)
            r.f_species.push_back(parse_double(f[3 + k], "F_species"));
        r.n_particles = static_cast<std::size_t>(parse_integer(f[3 + species], "n_particles"));
        r.n_atoms = static_cast<std::size_t>(parse_integer(f[4 + species], "n_atoms"));
        r.atom_mass_total = parse_double(f[5 + species], "atom_mass_total");
        records.push_back(std::move(r));
    }
    return records;
}

void write_snapshot(std::filesystem::path const& dir, Field const& field, double time)
{
    std::filesystem::create_directories(dir);
    std::string const stamp = format_double(time);
    write_matrix(dir / ("density_t" + stamp + ".txt"), field.density, field.grid);
    write_matrix(dir / ("potential_t" + stamp + ".txt"), field.potential, field.grid);
}
}  // namespace coalesce
