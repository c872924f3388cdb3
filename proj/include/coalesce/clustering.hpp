#pragma once

#include <span>
#include <vector>

#include "bessel.hpp"
#include "model.hpp"

namespace coalesce
{
/// Standard normal quantile (Acklam's rational approximation plus one Halley step).
double inv_normal_cdf(double p);

/// Axis-aligned square [lo.x, lo.x + side] x [lo.y, lo.y + side].
struct Square
{
    Vec2 lo;
    double side = 0;

    double diagonal2() const noexcept { return 2 * side * side; }
};

/*!
 * Candidate collision cell of the adaptive quadtree.
 *
 * `members` index the particle span the cell was built from. Moments refer
 * to the members only: `second_moment` is (1/M') sum m_i |X_i - X_cm|^2.
 */
struct ClusterCell
{
    Square box;
    int depth = 0;
    std::vector<std::size_t> members;
    double mass = 0;
    Vec2 center;
    double second_moment = 0;
    double nu = 0;
    MomentCoefficients coefficients;

    double diagonal2() const noexcept { return box.diagonal2(); }
};

struct DetectionOptions
{
    double eta = 0.1;
    double p = 0.01;
    int max_depth = 40;
};

ClusterCell make_cell(std::span<Particle const> particles, std::vector<std::size_t> members,
                      Square box, int depth, SystemParams const& params);

/// Y~ / s^2 < eta.
bool is_separated(ClusterCell const& cell, double eta) noexcept;

/// nu < 0 and Y~ + alpha dt + 2 beta sqrt(Y~) Phi^-1(p) sqrt(dt) < 0.
bool is_collidable(ClusterCell const& cell, double dt, double p);

/// Smallest square around all particles, widened by 1%.
Square bounding_square(std::span<Particle const> particles);

/*!
 * Quadtree search for separated, collidable aggregates.
 *
 * A cell is kept when it is separated and collidable; otherwise it is split
 * into four children if it holds more than two particles and is above the
 * depth limit, and dropped if not. Returned cells are disjoint and ordered
 * by their position in the tree.
 */
std::vector<ClusterCell> detect_clusters(std::span<Particle const> particles, double dt,
                                         SystemParams const& params,
                                         DetectionOptions const& options = {});
}  // namespace coalesce
