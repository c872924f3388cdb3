#pragma once

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "meanfield.hpp"
#include "model.hpp"

namespace coalesce
{
struct MomentRecord
{
    double time = 0;
    double y_norm = 0;                // (1/M) sum m |X - X_cm|^2
    double f_total = 0;               // sum m |X|^2
    std::vector<double> f_species;    // same, restricted to species 0..K-1
    std::size_t n_particles = 0;
    std::size_t n_atoms = 0;
    double atom_mass_total = 0;
    std::vector<double> atom_masses;  // not written to the series file
};

/// Mass above which a merged particle counts as a point mass: 8 pi mu / chi.
double critical_mass(double chi, double mu);

/*!
 * Snapshot of the moment diagnostics.
 *
 * `species_count` fixes the number of per-species columns; merged particles
 * enter F_total but no species column. Merged particles heavier than
 * `atom_threshold` are reported as atoms.
 */
MomentRecord record(SystemState const& state, std::size_t species_count,
                    double atom_threshold);

/// 4 mu (M - atoms)/M - (chi M / 2 pi)(1 - sum (M_i / M)^2) over the atoms M_i.
double predicted_slope_regularized(double total_mass, double mu, double chi,
                                   std::span<double const> atom_masses);

struct SpeciesRate
{
    double mu = 0;
    double mass = 0;
};

/// sum_i (4 mu_i - chi M / 2 pi) M_i.
double mpks_moment_rate(double chi, std::span<SpeciesRate const> species);

/// True when the second moment strictly decreases.
bool mpks_blowup_condition(double chi, std::span<SpeciesRate const> species);

/// Largest component masses without guaranteed blow-up; needs mu1 > 2 mu2.
std::pair<double, double> mpks_m_max(double chi, double mu1, double mu2);

struct LineFit
{
    double slope = 0;
    double intercept = 0;
    double r2 = 0;
    std::size_t n = 0;
};

/// Ordinary least squares y = slope x + intercept.
LineFit fit_line(std::span<double const> x, std::span<double const> y);

void write_series_header(std::ostream& out, std::size_t species_count);
void write_series_row(std::ostream& out, MomentRecord const& r);
void write_series(std::filesystem::path const& path, std::span<MomentRecord const> records,
                  std::size_t species_count);
std::vector<MomentRecord> read_series(std::filesystem::path const& path);

/// density_t<time>.txt and potential_t<time>.txt in `dir`.
void write_snapshot(std::filesystem::path const& dir, Field const& field, double time);
}  // namespace coalesce
