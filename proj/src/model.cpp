#include "coalesce/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "coalesce/errors.hpp"

namespace coalesce
{
void SystemParams::validate() const
{
    if (!(chi > 0) || !std::isfinite(chi))
        throw ConfigError("chi must be positive and finite");
    if (!(mu_tilde > 0) || !std::isfinite(mu_tilde))
        throw ConfigError("mu_tilde must be positive and finite");
    if (!(gamma > 0) || !std::isfinite(gamma))
        throw ConfigError("gamma must be positive and finite");
}

double SystemState::total_mass() const noexcept
{
    return coalesce::total_mass(std::span<Particle const>(particles));
}

double sigma_of_mass(double m, SystemParams const& params)
{
    if (!(m > 0))
        throw DomainError("sigma_of_mass: mass must be positive");
    return std::sqrt(2 * params.mu_tilde / m);
}

double total_mass(std::span<Particle const> particles) noexcept
{
    double sum = 0;
    for (auto const& p : particles)
        sum += p.mass;
    return sum;
}

double total_mass(std::span<double const> masses) noexcept
{
    return std::accumulate(masses.begin(), masses.end(), 0.0);
}

Vec2 center_of_mass(std::span<Particle const> particles)
{
    Vec2 weighted;
    double mass = 0;
    for (auto const& p : particles)
    {
        weighted += p.mass * p.position;
        mass += p.mass;
    }
    return weighted / mass;
}

// The double sum equals (1/M) sum_i m_i |X_i - X_cm|^2; the centered form
// avoids O(N^2) work and cancellation.
double system_second_moment(std::span<Particle const> particles)
{
    if (particles.size() < 2)
        return 0;
    Vec2 const cm = center_of_mass(particles);
    double sum = 0;
    double mass = 0;
    for (auto const& p : particles)
    {
        sum += p.mass * norm2(p.position - cm);
        mass += p.mass;
    }
    return sum / mass;
}

std::vector<std::size_t> apportion(std::span<double const> weights,
                                   std::size_t total)
{
    double const wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> counts(weights.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i)
    {
        double const exact = weights[i] / wsum * static_cast<double>(total);
        counts[i] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[i];
        remainders.emplace_back(exact - std::floor(exact), i);
    }
    // Ties go to the lower index so the result is reproducible.
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](auto const& a, auto const& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < total; ++k, ++assigned)
        ++counts[remainders[k % remainders.size()].second];
    return counts;
}

ParticleSystemSetup pks_to_particles(double chi, double mu, double total_mass,
                                     std::size_t n0)
{
    Species const single{total_mass, mu};
    return mpks_to_particles(chi, std::span<Species const>(&single, 1), n0);
}

ParticleSystemSetup mpks_to_particles(double chi,
                                      std::span<Species const> species,
                                      std::size_t n0)
{
    if (species.empty())
        throw ConfigError("at least one species is required");
    if (n0 < species.size())
        throw ConfigError("need at least one particle per species");
    if (!(chi > 0))
        throw ConfigError("chi must be positive");

    double mass = 0;
    double mass_mu = 0;
    for (auto const& s : species)
    {
        if (!(s.mass > 0) || !(s.mu > 0))
            throw ConfigError("species masses and diffusivities must be positive");
        mass += s.mass;
        mass_mu += s.mass * s.mu;
    }

    ParticleSystemSetup setup;
    setup.mu = mass_mu / mass;
    setup.params.chi = chi;
    setup.params.mu_tilde = setup.mu * mass / static_cast<double>(n0);
    setup.params.gamma = kLogKernelGamma;

    std::vector<double> etas;
    for (auto const& s : species)
        etas.push_back(s.mass * s.mu / (mass * setup.mu));
    auto const counts = apportion(etas, n0);

    for (std::size_t i = 0; i < species.size(); ++i)
    {
        if (counts[i] == 0)
        {
            throw ConfigError("species " + std::to_string(i + 1)
                              + " receives no particles (eta_i * N0 rounds to 0); "
                                "increase N0");
        }
        SpeciesLayout layout;
        layout.mass = species[i].mass;
        layout.mu = species[i].mu;
        layout.eta = etas[i];
        layout.count = counts[i];
        layout.particle_mass = species[i].mass / static_cast<double>(counts[i]);
        setup.species.push_back(layout);
    }
    return setup;
}

double recovered_species_mu(ParticleSystemSetup const& setup, std::size_t i)
{
    double mass = 0;
    for (auto const& s : setup.species)
        mass += s.mass;
    auto const& s = setup.species.at(i);
    return mass / s.mass * s.eta * setup.mu;
}
}  // namespace coalesce
