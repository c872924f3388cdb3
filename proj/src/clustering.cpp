#include "coalesce/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "coalesce/errors.hpp"

namespace coalesce
{
double inv_normal_cdf(double p)
{
    if (!(p > 0 && p < 1))
        throw DomainError("inv_normal_cdf: probability must lie in (0, 1)");

    static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                             -2.759285104469687e+02, 1.383577518672690e+02,
                                             -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                             -1.556989798598866e+02, 6.680131188771972e+01,
                                             -1.328068155288572e+01};
    static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                             -2.400758277161838e+00, -2.549732539343734e+00,
                                             4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                             2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low)
    {
        double const q = std::sqrt(-2 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }
    else if (p <= 1 - p_low)
    {
        double const q = p - 0.5;
        double const r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
    }
    else
    {
        double const q = std::sqrt(-2 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
            / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
    }

    // Halley refinement against the erfc-based CDF.
    double const e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    double const u = e * std::sqrt(2 * std::numbers::pi) * std::exp(0.5 * x * x);
    return x - u / (1 + 0.5 * x * u);
}

ClusterCell make_cell(std::span<Particle const> particles, std::vector<std::size_t> members,
                      Square box, int depth, SystemParams const& params)
{
    ClusterCell cell;
    cell.box = box;
    cell.depth = depth;
    cell.members = std::move(members);
    if (cell.members.empty())
        return cell;

    Vec2 weighted;
    std::vector<double> masses;
    masses.reserve(cell.members.size());
    for (auto i : cell.members)
    {
        auto const& p = particles[i];
        cell.mass += p.mass;
        weighted += p.mass * p.position;
        masses.push_back(p.mass);
    }
    cell.center = weighted / cell.mass;
    double moment = 0;
    for (auto i : cell.members)
        moment += particles[i].mass * norm2(particles[i].position - cell.center);
    cell.second_moment = moment / cell.mass;
    cell.nu = bessel_index(masses, params);
    cell.coefficients = moment_coefficients(masses, params);
    return cell;
}

bool is_separated(ClusterCell const& cell, double eta) noexcept
{
    double const s2 = cell.diagonal2();
    if (s2 <= 0)
        return cell.second_moment == 0;
    return cell.second_moment / s2 < eta;
}

bool is_collidable(ClusterCell const& cell, double dt, double p)
{
    if (!(dt > 0))
        throw DomainError("is_collidable: dt must be positive");
    if (cell.members.size() < 2 || !(cell.nu < 0))
        return false;
    double const y = cell.second_moment;
    auto const& c = cell.coefficients;
    return y + c.alpha * dt + 2 * c.beta * std::sqrt(y) * inv_normal_cdf(p) * std::sqrt(dt)
           < 0;
}

Square bounding_square(std::span<Particle const> particles)
{
    if (particles.empty())
        return {{0, 0}, 1};
    Vec2 lo = particles.front().position;
    Vec2 hi = lo;
    for (auto const& p : particles)
    {
        lo.x = std::min(lo.x, p.position.x);
        lo.y = std::min(lo.y, p.position.y);
        hi.x = std::max(hi.x, p.position.x);
        hi.y = std::max(hi.y, p.position.y);
    }
    double side = 1.01 * std::max(hi.x - lo.x, hi.y - lo.y);
    Vec2 const mid = 0.5 * (lo + hi);
    if (!(side > 0))
        side = std::max(1.0, 1e-8 * std::max(std::abs(mid.x), std::abs(mid.y)));
    return {mid - Vec2{0.5 * side, 0.5 * side}, side};
}

namespace
{
struct Search
{
    std::span<Particle const> particles;
    double dt;
    SystemParams const& params;
    DetectionOptions const& options;
    std::vector<ClusterCell> kept;

    void visit(Square box, std::vector<std::size_t> members, int depth)
    {
        if (members.size() < 2)
            return;
        auto cell = make_cell(particles, std::move(members), box, depth, params);
        if (is_separated(cell, options.eta) && is_collidable(cell, dt, options.p))
        {
            kept.push_back(std::move(cell));
            return;
        }
        if (cell.members.size() <= 2 || depth >= options.max_depth)
            return;

        double const half = 0.5 * box.side;
        Vec2 const mid = box.lo + Vec2{half, half};
        std::array<std::vector<std::size_t>, 4> quadrants;
        for (auto i : cell.members)
        {
            Vec2 const x = particles[i].position;
            int const q = (x.x >= mid.x ? 1 : 0) + (x.y >= mid.y ? 2 : 0);
            quadrants[q].push_back(i);
        }
        cell.members.clear();
        cell.members.shrink_to_fit();
        for (int q = 0; q < 4; ++q)
        {
            Square const child{{box.lo.x + ((q & 1) ? half : 0.0),
                                box.lo.y + ((q & 2) ? half : 0.0)},
                               half};
            visit(child, std::move(quadrants[q]), depth + 1);
        }
    }
};
}  // namespace

std::vector<ClusterCell> detect_clusters(std::span<Particle const> particles, double dt,
                                         SystemParams const& params,
                                         DetectionOptions const& options)
{
    if (!(dt > 0))
        throw DomainError("detect_clusters: dt must be positive");
    if (!(options.p > 0 && options.p < 1))
        throw DomainError("detect_clusters: p must lie in (0, 1)");
    if (!(options.eta > 0))
        throw DomainError("detect_clusters: eta must be positive");
    if (particles.size() < 2)
        return {};

    std::vector<std::size_t> all(particles.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i] = i;
    // Id order at the root keeps every member list (and every floating-point
    // sum over it) independent of the particle storage order.
    std::sort(all.begin(), all.end(),
              [&](auto a, auto b) { return particles[a].id < particles[b].id; });
    Search search{particles, dt, params, options, {}};
    search.visit(bounding_square(particles), std::move(all), 0);
    return std::move(search.kept);
}
}  // namespace coalesce
