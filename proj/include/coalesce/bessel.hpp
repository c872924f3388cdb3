#pragma once

#include <optional>
#include <span>
#include <vector>

#include "model.hpp"
#include "random.hpp"

namespace coalesce
{
/// Drift and noise scale of dY = alpha dt + 2 beta sqrt(Y) dW.
struct MomentCoefficients
{
    double alpha = 0;  // length^2 / time
    double beta = 0;   // length / sqrt(time)
};

enum class OriginClass
{
    Entrance,  // nu >= 0: never reached
    Regular,   // -1 < nu < 0: reachable, behavior must be prescribed
    Absorbing  // nu <= -1: hit in finite time
};

char const* to_string(OriginClass c) noexcept;

/*!
 * Coefficients of the second-moment SDE of a group of particles.
 *
 * alpha = 4 mu_tilde (N - 1) / M - gamma chi M (1 - sum (m_j / M)^2),
 * beta = sqrt(2 mu_tilde / M). With gamma = 1/(2 pi) the interaction term is
 * chi M / (2 pi) (...).
 */
MomentCoefficients moment_coefficients(std::span<double const> masses,
                                       SystemParams const& params);

/// Squared-Bessel index nu = (N - 2) - (gamma chi M^2 / 4 mu_tilde)(1 - sum (m_j/M)^2).
double bessel_index(std::span<double const> masses, SystemParams const& params);

OriginClass classify_origin(double nu) noexcept;

struct MergeIndices
{
    double initial = 0;  // full system before the merge
    double final = 0;    // full system after the cluster coalesces
    double cluster = 0;  // the coalescing subsystem
};

/// Indices before/after coalescing `cluster` (indices into `masses`).
MergeIndices index_after_merge(std::span<double const> masses,
                               std::span<std::size_t const> cluster,
                               SystemParams const& params);

/*!
 * Sample the time at which the second moment started at `y0` is absorbed.
 *
 * In rescaled time the squared Bessel process of index nu < 0 hits zero at
 * y0 / (2U) with U ~ Gamma(|nu|, 1); physical time divides by beta^2.
 */
template<class G>
double sample_hitting_time(double y0, double nu, double beta, G& rng)
{
    if (!(nu < 0))
        throw DomainError("sample_hitting_time: origin is not reachable for nu >= 0");
    if (!(y0 >= 0))
        throw DomainError("sample_hitting_time: initial moment must be nonnegative");
    if (!(beta > 0))
        throw DomainError("sample_hitting_time: beta must be positive");
    if (y0 == 0)
        return 0;
    double const u = sample_gamma(-nu, rng);
    return y0 / (2 * u) / (beta * beta);
}

struct BesselPath
{
    std::vector<double> times;
    std::vector<double> values;
    std::optional<double> absorbed_at;
};

/*!
 * Euler-Maruyama reference path of dY = 2(nu + 1) dt + 2 sqrt(Y) dW.
 *
 * For nu < 0, Y is absorbed at zero; otherwise overshoots are reflected. Only every `record_every`-th point is stored
 * (0 stores nothing). Used to validate the analytic hitting-time law.
 */
BesselPath simulate_squared_bessel_oracle(double y0, double nu, double dt,
                                          double t_max, Stream& rng,
                                          std::size_t record_every = 1);

//---------------------------------------------------------------------------//
// Subsystem second-moment corrections
//---------------------------------------------------------------------------//
/// Radial derivatives of an isotropic interaction kernel V(r).
struct Kernel
{
    double gamma = kLogKernelGamma;

    double first_derivative(double r) const noexcept { return gamma / r; }
    double second_derivative(double r) const noexcept { return -gamma / (r * r); }
};

/*!
 * Exact dt-coefficient added to d(Y~) of the pair (1, 2) by a third particle.
 *
 * Y~ = m1 m2 / (m1 + m2)^2 |X1 - X2|^2 and the third particle pulls each pair
 * member along -chi m3 grad V.
 */
double subsystem_drift_exact3(Vec2 x1, Vec2 x2, Vec2 x3, double m1, double m2,
                              double m3, double chi, Kernel kernel = {});

/*!
 * Monopole (tidal) approximation of the same correction for a cluster.
 *
 * Every outsider i contributes -2 chi m_i V''(R) weighted by the cluster's
 * pair moments: (1/2M'^2) sum_{j,k} m_j m_k |X_j - X_k|^2 cos 2 theta_ijk,
 * with theta the angle between X_j - X_k and the line from outsider i to the
 * (j, k) midpoint. For a pair this is -2 chi Y~ m_3 V''(R) cos 2 theta.
 */
double subsystem_drift_monopole(std::span<Particle const> cluster,
                                std::span<Particle const> outsiders,
                                double chi, Kernel kernel = {});
}  // namespace coalesce
