#include "coalesce/bessel.hpp"

#include <algorithm>
#include <cmath>

namespace coalesce
{
namespace
{
struct MassSums
{
    double total = 0;
    double squares = 0;
    std::size_t count = 0;
};

MassSums mass_sums(std::span<double const> masses)
{
    MassSums s;
    for (double m : masses)
    {
        if (!(m > 0))
            throw DomainError("particle masses must be positive");
        s.total += m;
        s.squares += m * m;
    }
    s.count = masses.size();
    return s;
}

// M^2 (1 - sum (m_j / M)^2) = M^2 - sum m_j^2, evaluated without dividing.
double pair_mass_product(MassSums const& s)
{
    return s.total * s.total - s.squares;
}
}  // namespace

char const* to_string(OriginClass c) noexcept
{
    switch (c)
    {
        case OriginClass::Entrance:
            return "entrance";
        case OriginClass::Regular:
            return "regular";
        case OriginClass::Absorbing:
            return "absorbing";
    }
    return "?";
}

MomentCoefficients moment_coefficients(std::span<double const> masses,
                                       SystemParams const& params)
{
    if (masses.empty())
        throw DomainError("moment_coefficients: need at least one particle");
    auto const s = mass_sums(masses);
    double const n = static_cast<double>(s.count);
    MomentCoefficients c;
    c.alpha = 4 * params.mu_tilde * (n - 1) / s.total
              - params.gamma * params.chi * pair_mass_product(s) / s.total;
    c.beta = std::sqrt(2 * params.mu_tilde / s.total);
    return c;
}

double bessel_index(std::span<double const> masses, SystemParams const& params)
{
    if (masses.empty())
        throw DomainError("bessel_index: need at least one particle");
    auto const s = mass_sums(masses);
    double const n = static_cast<double>(s.count);
    return (n - 2)
           - params.gamma * params.chi * pair_mass_product(s) / (4 * params.mu_tilde);
}

OriginClass classify_origin(double nu) noexcept
{
    if (nu >= 0)
        return OriginClass::Entrance;
    if (nu > -1)
        return OriginClass::Regular;
    return OriginClass::Absorbing;
}

MergeIndices index_after_merge(std::span<double const> masses,
                               std::span<std::size_t const> cluster,
                               SystemParams const& params)
{
    if (cluster.empty())
        throw DomainError("index_after_merge: cluster is empty");
    std::vector<char> in_cluster(masses.size(), 0);
    for (auto i : cluster)
    {
        if (i >= masses.size())
            throw DomainError("index_after_merge: cluster index out of range");
        if (in_cluster[i])
            throw DomainError("index_after_merge: duplicate cluster index");
        in_cluster[i] = 1;
    }
    if (cluster.size() == masses.size())
    {
        throw DomainError(
            "index_after_merge: cluster must be a strict subset of the system");
    }

    std::vector<double> cluster_masses;
    std::vector<double> merged_masses;
    double cluster_mass = 0;
    for (std::size_t i = 0; i < masses.size(); ++i)
    {
        if (in_cluster[i])
        {
            cluster_masses.push_back(masses[i]);
            cluster_mass += masses[i];
        }
        else
        {
            merged_masses.push_back(masses[i]);
        }
    }
    merged_masses.push_back(cluster_mass);

    MergeIndices r;
    r.initial = bessel_index(masses, params);
    r.final = bessel_index(merged_masses, params);
    r.cluster = bessel_index(cluster_masses, params);
    return r;
}

BesselPath simulate_squared_bessel_oracle(double y0, double nu, double dt,
                                          double t_max, Stream& rng,
                                          std::size_t record_every)
{
    if (!(dt > 0))
        throw DomainError("simulate_squared_bessel_oracle: dt must be positive");
    if (!(y0 >= 0))
        throw DomainError("simulate_squared_bessel_oracle: y0 must be nonnegative");

    BesselPath path;
    auto record = [&](std::size_t step, double t, double y) {
        if (record_every != 0 && step % record_every == 0)
        {
            path.times.push_back(t);
            path.values.push_back(y);
        }
    };

    double const drift = 2 * (nu + 1) * dt;
    double const sqrt_dt = std::sqrt(dt);
    double y = y0;
    record(0, 0, y);
    if (y <= 0 && nu < 0)
    {
        path.absorbed_at = 0;
        return path;
    }

    auto const steps = static_cast<std::size_t>(std::ceil(t_max / dt));
    for (std::size_t k = 1; k <= steps; ++k)
    {
        y += drift + 2 * std::sqrt(y) * sqrt_dt * standard_normal(rng);
        double const t = static_cast<double>(k) * dt;
        if (y <= 0 && nu >= 0)
            y = -y;  // origin is reflecting; the Euler step merely overshot
        if (y <= 0)
        {
            y = 0;
            record(0, t, y);
            path.absorbed_at = t;
            return path;
        }
        record(k, t, y);
    }
    return path;
}

double subsystem_drift_exact3(Vec2 x1, Vec2 x2, Vec2 x3, double m1, double m2,
                              double m3, double chi, Kernel kernel)
{
    Vec2 const r1 = x1 - x3;
    Vec2 const r2 = x2 - x3;
    double const d1 = norm(r1);
    double const d2 = norm(r2);
    if (d1 == 0 || d2 == 0)
        throw DomainError("subsystem_drift_exact3: third particle coincides with the pair");
    if (m3 == 0 || chi == 0)
        return 0;

    // grad V(x) = V'(|x|) x / |x|
    Vec2 const g1 = (kernel.first_derivative(d1) / d1) * r1;
    Vec2 const g2 = (kernel.first_derivative(d2) / d2) * r2;
    double const msum = m1 + m2;
    return -2 * chi * m3 * (m1 * m2 / (msum * msum)) * dot(x1 - x2, g1 - g2);
}

double subsystem_drift_monopole(std::span<Particle const> cluster,
                                std::span<Particle const> outsiders,
                                double chi, Kernel kernel)
{
    if (cluster.size() < 2)
        throw DomainError("subsystem_drift_monopole: cluster needs at least two particles");

    double cluster_mass = 0;
    for (auto const& p : cluster)
        cluster_mass += p.mass;

    double sum = 0;
    for (std::size_t j = 0; j < cluster.size(); ++j)
    {
        for (std::size_t k = j + 1; k < cluster.size(); ++k)
        {
            auto const& pj = cluster[j];
            auto const& pk = cluster[k];
            Vec2 const sep = pj.position - pk.position;
            double const sep2 = norm2(sep);
            if (sep2 == 0)
                continue;
            Vec2 const mid = (pj.mass * pj.position + pk.mass * pk.position)
                             / (pj.mass + pk.mass);
            double tidal = 0;
            for (auto const& out : outsiders)
            {
                Vec2 const r = mid - out.position;
                double const dist2 = norm2(r);
                if (dist2 == 0)
                {
                    throw DomainError(
                        "subsystem_drift_monopole: outsider coincides with a pair center");
                }
                // cos 2 theta = 2 cos^2 theta - 1
                double const c = dot(sep, r);
                double const cos2 = 2 * c * c / (sep2 * dist2) - 1;
                tidal += out.mass * kernel.second_derivative(std::sqrt(dist2)) * cos2;
            }
            // Unordered pair counted once: weight m_j m_k |sep|^2 / M'^2.
            sum += pj.mass * pk.mass * sep2 * tidal;
        }
    }
    return -2 * chi * sum / (cluster_mass * cluster_mass);
}
}  // namespace coalesce
