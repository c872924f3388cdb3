#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "vec2.hpp"

namespace coalesce
{
using ParticleId = std::uint64_t;

/// Species tag carried by particles created through coalescence.
inline constexpr int kMergedSpecies = -1;

/// Coefficient of the logarithmic kernel V(r) = gamma * ln r.
inline constexpr double kLogKernelGamma = 1.0 / (2.0 * std::numbers::pi);

struct Particle
{
    ParticleId id = 0;
    Vec2 position;
    double mass = 1;
    int species = 0;

    bool merged() const noexcept { return species == kMergedSpecies; }
};

/*!
 * Interaction and noise constants of the particle system.
 *
 * Particle n drifts with chi * grad c and diffuses with sqrt(2 mu_tilde / m_n).
 * The kernel behaves like gamma * ln r near the origin.
 */
struct SystemParams
{
    double chi = 1;
    double mu_tilde = 1;
    double gamma = kLogKernelGamma;

    void validate() const;
};

struct SystemState
{
    std::vector<Particle> particles;
    double time = 0;
    std::uint64_t step = 0;
    ParticleId next_id = 0;
    SystemParams params;

    double total_mass() const noexcept;
    ParticleId fresh_id() noexcept { return next_id++; }
};

/// One species of a (multispecies) Keller-Segel system.
struct Species
{
    double mass = 1;  // M_i
    double mu = 1;    // mu_i
};

/// Per-species particle counts and masses produced by the parameter maps.
struct SpeciesLayout
{
    double mass = 0;
    double mu = 0;
    double eta = 0;
    std::size_t count = 0;
    double particle_mass = 0;
};

struct ParticleSystemSetup
{
    SystemParams params;
    double mu = 0;  // auxiliary (mass-averaged) diffusivity
    std::vector<SpeciesLayout> species;
};

double sigma_of_mass(double m, SystemParams const& params);

double total_mass(std::span<Particle const> particles) noexcept;
double total_mass(std::span<double const> masses) noexcept;

/// Normalized pairwise second moment (1/2M^2) sum_ij m_i m_j |X_i - X_j|^2.
double system_second_moment(std::span<Particle const> particles);
Vec2 center_of_mass(std::span<Particle const> particles);

ParticleSystemSetup pks_to_particles(double chi, double mu, double total_mass,
                                     std::size_t n0);
ParticleSystemSetup mpks_to_particles(double chi,
                                      std::span<Species const> species,
                                      std::size_t n0);

/// Species diffusivity implied by a particle layout: (M / M_i) eta_i mu.
double recovered_species_mu(ParticleSystemSetup const& setup, std::size_t i);

/// Largest-remainder apportionment of `total` items by `weights`.
std::vector<std::size_t> apportion(std::span<double const> weights,
                                   std::size_t total);
}  // namespace coalesce
