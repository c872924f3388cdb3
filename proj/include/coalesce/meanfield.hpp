#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "model.hpp"

namespace coalesce
{
//---------------------------------------------------------------------------//
/*!
 * Uniform square-cell node grid over an axis-aligned box.
 *
 * Node (i, j) sits at (x0 + i dx, y0 + j dx); arrays are stored row-major
 * with j as the row index.
 */
class Grid
{
  public:
    Grid() = default;

    /// Box [x0, x1] x [y0, y1] with nx nodes per row; ny follows from dx.
    static Grid square_cells(double x0, double x1, double y0, double y1,
                             std::size_t nx);
    /// Square box [-half, half]^2 with n x n nodes.
    static Grid centered(double half_width, std::size_t n);

    double x0() const noexcept { return x0_; }
    double y0() const noexcept { return y0_; }
    double x1() const noexcept { return x0_ + dx_ * static_cast<double>(nx_ - 1); }
    double y1() const noexcept { return y0_ + dx_ * static_cast<double>(ny_ - 1); }
    double dx() const noexcept { return dx_; }
    std::size_t nx() const noexcept { return nx_; }
    std::size_t ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return nx_ * ny_; }

    std::size_t index(std::size_t i, std::size_t j) const noexcept { return j * nx_ + i; }
    Vec2 node(std::size_t i, std::size_t j) const noexcept
    {
        return {x0_ + dx_ * static_cast<double>(i), y0_ + dx_ * static_cast<double>(j)};
    }
    bool on_boundary(std::size_t i, std::size_t j) const noexcept
    {
        return i == 0 || j == 0 || i + 1 == nx_ || j + 1 == ny_;
    }
    bool contains(Vec2 x) const noexcept
    {
        return x.x >= x0_ && x.x <= x1() && x.y >= y0_ && x.y <= y1();
    }

  private:
    double x0_ = 0;
    double y0_ = 0;
    double dx_ = 1;
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
};

/// Cell containing an in-domain point and the point's fractional offsets.
struct CellLocation
{
    std::size_t i = 0;
    std::size_t j = 0;
    double fx = 0;
    double fy = 0;
};

CellLocation locate(Grid const& grid, Vec2 x) noexcept;

struct Field
{
    Grid grid;
    std::vector<double> density;    // P_ij, mass / length^2
    std::vector<double> potential;  // C_ij
    std::vector<double> grad_x;     // CX_ij
    std::vector<double> grad_y;     // CY_ij
    double total_mass = 0;          // all particles, in or out of the domain
    Vec2 center_of_mass;
    double gamma = kLogKernelGamma;
};

struct SolverOptions
{
    double tolerance = 1e-8;  // on max-norm residual relative to max density
    int max_iterations = 0;   // 0: scale with grid size
};

struct SolveReport
{
    int iterations = 0;
    double residual = 0;  // max_ij |Lap_h C + 2 pi gamma P| / max(2 pi gamma |P|)
};

/// Bilinear (cloud-in-cell) deposit of in-domain particle mass, divided by dx^2.
std::vector<double> deposit_mass(std::span<Particle const> particles, Grid const& grid);

/*!
 * Solve Lap_h C = -2 pi gamma P on interior nodes.
 *
 * Boundary nodes carry the monopole potential -gamma M ln|X_ij - x_cm|, with
 * the distance clamped below by dx/2. For gamma = 1/(2 pi) this is the
 * Poisson problem Lap c = -P. Conjugate gradients on the SPD five-point
 * system; `initial` (if nonempty) is a warm start.
 */
std::vector<double> solve_field(std::span<double const> density, Grid const& grid,
                                double total_mass, Vec2 x_cm, double gamma = kLogKernelGamma,
                                SolverOptions const& options = {},
                                std::span<double const> initial = {},
                                SolveReport* report = nullptr);

/// Central differences inside, one-sided second-order stencils on the boundary ring.
void gradient_field(std::span<double const> potential, Grid const& grid,
                    std::vector<double>& grad_x, std::vector<double>& grad_y);

/// Interpolated grad c in the domain; monopole -gamma M (x - x_cm)/|x - x_cm|^2 outside.
Vec2 sample_gradient(Vec2 x, Field const& field);

/// Deposit, solve and differentiate in one go.
Field build_field(std::span<Particle const> particles, Grid const& grid,
                  double gamma = kLogKernelGamma, SolverOptions const& options = {},
                  std::span<double const> warm_start = {},
                  SolveReport* report = nullptr);

/// Max-norm of Lap_h C + 2 pi gamma P over interior nodes.
double poisson_residual(std::span<double const> potential,
                        std::span<double const> density, Grid const& grid,
                        double gamma = kLogKernelGamma);

/// Plain-text matrix: ny rows of nx space-separated values.
void write_matrix(std::filesystem::path const& path, std::span<double const> values,
                  Grid const& grid);
std::vector<double> read_matrix(std::filesystem::path const& path, Grid const& grid);
}  // namespace coalesce
