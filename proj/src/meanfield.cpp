#include "coalesce/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "coalesce/errors.hpp"
#include "coalesce/format.hpp"

namespace coalesce
{
//---------------------------------------------------------------------------//
// Grid
//---------------------------------------------------------------------------//
Grid Grid::square_cells(double x0, double x1, double y0, double y1, std::size_t nx)
{
    if (nx < 3)
        throw ConfigError("grid needs at least 3 nodes per axis");
    if (!(x1 > x0) || !(y1 > y0))
        throw ConfigError("grid box must have positive extent");
    double const dx = (x1 - x0) / static_cast<double>(nx - 1);
    double const rows = (y1 - y0) / dx;
    double const rounded = std::round(rows);
    if (std::abs(rows - rounded) > 1e-9 * std::max(1.0, rows))
    {
        throw ConfigError("grid box is incompatible with square cells: (y1 - y0) / dx = "
                          + format_double(rows));
    }
    Grid g;
    g.x0_ = x0;
    g.y0_ = y0;
    g.dx_ = dx;
    g.nx_ = nx;
    g.ny_ = static_cast<std::size_t>(rounded) + 1;
    if (g.ny_ < 3)
        throw ConfigError("grid needs at least 3 nodes per axis");
    return g;
}

Grid Grid::centered(double half_width, std::size_t n)
{
    return square_cells(-half_width, half_width, -half_width, half_width, n);
}

CellLocation locate(Grid const& grid, Vec2 x) noexcept
{
    double const u = (x.x - grid.x0()) / grid.dx();
    double const v = (x.y - grid.y0()) / grid.dx();
    auto const clamp_cell = [](double t, std::size_t n) {
        auto const c = static_cast<std::size_t>(std::max(0.0, std::floor(t)));
        return std::min(c, n - 2);
    };
    CellLocation loc;
    loc.i = clamp_cell(u, grid.nx());
    loc.j = clamp_cell(v, grid.ny());
    loc.fx = std::clamp(u - static_cast<double>(loc.i), 0.0, 1.0);
    loc.fy = std::clamp(v - static_cast<double>(loc.j), 0.0, 1.0);
    return loc;
}

//---------------------------------------------------------------------------//
// Deposition
//---------------------------------------------------------------------------//
std::vector<double> deposit_mass(std::span<Particle const> particles, Grid const& grid)
{
    std::vector<double> rho(grid.size(), 0.0);
    double const inv_area = 1 / (grid.dx() * grid.dx());
    for (auto const& p : particles)
    {
        if (!grid.contains(p.position))
            continue;
        auto const c = locate(grid, p.position);
        double const m = p.mass * inv_area;
        rho[grid.index(c.i, c.j)] += m * (1 - c.fx) * (1 - c.fy);
        rho[grid.index(c.i + 1, c.j)] += m * c.fx * (1 - c.fy);
        rho[grid.index(c.i, c.j + 1)] += m * (1 - c.fx) * c.fy;
        rho[grid.index(c.i + 1, c.j + 1)] += m * c.fx * c.fy;
    }
    return rho;
}

//---------------------------------------------------------------------------//
// Poisson solve
//---------------------------------------------------------------------------//
namespace
{
// y = A x on interior nodes, A = 4 I - (neighbors); boundary entries of x are
// treated as zero and boundary entries of y are left at zero.
void apply_operator(Grid const& g, std::vector<double> const& x, std::vector<double>& y)
{
    std::size_t const nx = g.nx();
    for (std::size_t j = 1; j + 1 < g.ny(); ++j)
    {
        double const* row = x.data() + j * nx;
        double const* below = row - nx;
        double const* above = row + nx;
        double* out = y.data() + j * nx;
        for (std::size_t i = 1; i + 1 < nx; ++i)
        {
            double const w = (i == 1) ? 0.0 : row[i - 1];
            double const e = (i + 2 == nx) ? 0.0 : row[i + 1];
            double const s = (j == 1) ? 0.0 : below[i];
            double const n = (j + 2 == g.ny()) ? 0.0 : above[i];
            out[i] = 4 * row[i] - w - e - s - n;
        }
    }
}

double interior_dot(Grid const& g, std::vector<double> const& a, std::vector<double> const& b)
{
    double sum = 0;
    for (std::size_t j = 1; j + 1 < g.ny(); ++j)
        for (std::size_t i = 1; i + 1 < g.nx(); ++i)
            sum += a[g.index(i, j)] * b[g.index(i, j)];
    return sum;
}

double interior_max_abs(Grid const& g, std::vector<double> const& a)
{
    double m = 0;
    for (std::size_t j = 1; j + 1 < g.ny(); ++j)
        for (std::size_t i = 1; i + 1 < g.nx(); ++i)
            m = std::max(m, std::abs(a[g.index(i, j)]));
    return m;
}

// r = b - A x using the full potential (with boundary values) in x.
void true_residual(Grid const& g, std::vector<double> const& c,
                   std::vector<double> const& source, std::vector<double>& r)
{
    std::size_t const nx = g.nx();
    for (std::size_t j = 1; j + 1 < g.ny(); ++j)
    {
        for (std::size_t i = 1; i + 1 < nx; ++i)
        {
            std::size_t const k = j * nx + i;
            r[k] = source[k] - (4 * c[k] - c[k - 1] - c[k + 1] - c[k - nx] - c[k + nx]);
        }
    }
}
}  // namespace

std::vector<double> solve_field(std::span<double const> density, Grid const& grid,
                                double total_mass, Vec2 x_cm, double gamma,
                                SolverOptions const& options,
                                std::span<double const> initial, SolveReport* report)
{
    if (density.size() != grid.size())
        throw DomainError("solve_field: density does not match the grid");
    if (!is_finite(x_cm))
        throw DomainError("solve_field: center of mass is not finite");

    std::size_t const n = grid.size();
    double const dx = grid.dx();
    double const coupling = 2 * std::numbers::pi * gamma;

    std::vector<double> c(n, 0.0);
    if (initial.size() == n)
        std::copy(initial.begin(), initial.end(), c.begin());

    // Monopole Dirichlet data.
    double const min_dist = 0.5 * dx;
    for (std::size_t j = 0; j < grid.ny(); ++j)
    {
        for (std::size_t i = 0; i < grid.nx(); ++i)
        {
            if (!grid.on_boundary(i, j))
                continue;
            double const r = std::max(norm(grid.node(i, j) - x_cm), min_dist);
            c[grid.index(i, j)] = total_mass == 0 ? 0.0 : -gamma * total_mass * std::log(r);
        }
    }

    // Scaled source s = coupling dx^2 P; the system is (4C - sum nbrs) = s.
    std::vector<double> source(n, 0.0);
    double source_max = 0;
    for (std::size_t j = 1; j + 1 < grid.ny(); ++j)
    {
        for (std::size_t i = 1; i + 1 < grid.nx(); ++i)
        {
            auto const k = grid.index(i, j);
            source[k] = coupling * dx * dx * density[k];
            source_max = std::max(source_max, std::abs(source[k]));
        }
    }

    std::vector<double> r(n, 0.0);
    true_residual(grid, c, source, r);
    double boundary_scale = 0;
    {
        // Size of the boundary data as it enters interior equations.
        std::vector<double> zero_interior = c;
        for (std::size_t j = 1; j + 1 < grid.ny(); ++j)
            for (std::size_t i = 1; i + 1 < grid.nx(); ++i)
                zero_interior[grid.index(i, j)] = 0;
        std::vector<double> rb(n, 0.0);
        std::vector<double> nosource(n, 0.0);
        true_residual(grid, zero_interior, nosource, rb);
        boundary_scale = interior_max_abs(grid, rb);
    }
    double const scale = source_max > 0 ? source_max : boundary_scale;
    double const target = options.tolerance * scale;
    int const max_iter = options.max_iterations > 0
                             ? options.max_iterations
                             : static_cast<int>(50 * std::max(grid.nx(), grid.ny()) + 1000);

    auto finish = [&](int iterations) {
        true_residual(grid, c, source, r);
        double const res = interior_max_abs(grid, r);
        if (report)
        {
            report->iterations = iterations;
            report->residual = scale > 0 ? res / scale : res;
        }
        return res;
    };

    if (scale == 0)
    {
        finish(0);
        return c;
    }

    std::vector<double> p(n, 0.0);
    std::vector<double> ap(n, 0.0);
    int iter = 0;
    // Restart CG from the true residual until the true residual meets the
    // target; recursive residuals drift slightly in long solves.
    while (true)
    {
        true_residual(grid, c, source, r);
        if (interior_max_abs(grid, r) <= target)
            break;
        p = r;
        double rr = interior_dot(grid, r, r);
        while (iter < max_iter)
        {
            apply_operator(grid, p, ap);
            double const alpha = rr / interior_dot(grid, p, ap);
            for (std::size_t j = 1; j + 1 < grid.ny(); ++j)
            {
                for (std::size_t i = 1; i + 1 < grid.nx(); ++i)
                {
                    auto const k = grid.index(i, j);
                    c[k] += alpha * p[k];
                    r[k] -= alpha * ap[k];
                }
            }
            ++iter;
            if (interior_max_abs(grid, r) <= 0.5 * target)
                break;
            double const rr_new = interior_dot(grid, r, r);
            double const ratio = rr_new / rr;
            rr = rr_new;
            for (std::size_t j = 1; j + 1 < grid.ny(); ++j)
            {
                for (std::size_t i = 1; i + 1 < grid.nx(); ++i)
                {
                    auto const k = grid.index(i, j);
                    p[k] = r[k] + ratio * p[k];
                }
            }
        }
        if (iter >= max_iter)
        {
            double const res = finish(iter);
            if (res > target)
            {
                throw SolverError("solve_field: conjugate gradients did not converge "
                                  "(relative residual "
                                      + format_double(res / scale) + " after "
                                      + std::to_string(iter) + " iterations)",
                                  iter, res / scale);
            }
            return c;
        }
    }
    finish(iter);
    return c;
}

double poisson_residual(std::span<double const> potential,
                        std::span<double const> density, Grid const& grid, double gamma)
{
    double const coupling = 2 * std::numbers::pi * gamma;
    double const inv_dx2 = 1 / (grid.dx() * grid.dx());
    std::size_t const nx = grid.nx();
    double res = 0;
    for (std::size_t j = 1; j + 1 < grid.ny(); ++j)
    {
        for (std::size_t i = 1; i + 1 < nx; ++i)
        {
            std::size_t const k = j * nx + i;
            double const lap = (potential[k - 1] + potential[k + 1] + potential[k - nx]
                                + potential[k + nx] - 4 * potential[k])
                               * inv_dx2;
            res = std::max(res, std::abs(lap + coupling * density[k]));
        }
    }
    return res;
}

//---------------------------------------------------------------------------//
// Gradient
//---------------------------------------------------------------------------//
void gradient_field(std::span<double const> potential, Grid const& grid,
                    std::vector<double>& grad_x, std::vector<double>& grad_y)
{
    std::size_t const nx = grid.nx();
    std::size_t const ny = grid.ny();
    double const h2 = 2 * grid.dx();
    grad_x.assign(grid.size(), 0.0);
    grad_y.assign(grid.size(), 0.0);
    auto at = [&](std::size_t i, std::size_t j) { return potential[grid.index(i, j)]; };
    for (std::size_t j = 0; j < ny; ++j)
    {
        for (std::size_t i = 0; i < nx; ++i)
        {
            double gx;
            if (i == 0)
                gx = -3 * at(0, j) + 4 * at(1, j) - at(2, j);
            else if (i + 1 == nx)
                gx = 3 * at(i, j) - 4 * at(i - 1, j) + at(i - 2, j);
            else
                gx = at(i + 1, j) - at(i - 1, j);

            double gy;
            if (j == 0)
                gy = -3 * at(i, 0) + 4 * at(i, 1) - at(i, 2);
            else if (j + 1 == ny)
                gy = 3 * at(i, j) - 4 * at(i, j - 1) + at(i, j - 2);
            else
                gy = at(i, j + 1) - at(i, j - 1);

            grad_x[grid.index(i, j)] = gx / h2;
            grad_y[grid.index(i, j)] = gy / h2;
        }
    }
}

Vec2 sample_gradient(Vec2 x, Field const& field)
{
    auto const& g = field.grid;
    if (!g.contains(x))
    {
        Vec2 const r = x - field.center_of_mass;
        double const r2 = norm2(r);
        if (r2 == 0)
            throw DomainError("sample_gradient: monopole evaluated at the center of mass");
        return (-field.gamma * field.total_mass / r2) * r;
    }
    auto const c = locate(g, x);
    double const w00 = (1 - c.fx) * (1 - c.fy);
    double const w10 = c.fx * (1 - c.fy);
    double const w01 = (1 - c.fx) * c.fy;
    double const w11 = c.fx * c.fy;
    auto const k00 = g.index(c.i, c.j);
    auto const k10 = k00 + 1;
    auto const k01 = k00 + g.nx();
    auto const k11 = k01 + 1;
    return {w00 * field.grad_x[k00] + w10 * field.grad_x[k10] + w01 * field.grad_x[k01]
                + w11 * field.grad_x[k11],
            w00 * field.grad_y[k00] + w10 * field.grad_y[k10] + w01 * field.grad_y[k01]
                + w11 * field.grad_y[k11]};
}

Field build_field(std::span<Particle const> particles, Grid const& grid, double gamma,
                  SolverOptions const& options, std::span<double const> warm_start,
                  SolveReport* report)
{
    Field f;
    f.grid = grid;
    f.gamma = gamma;
    f.total_mass = total_mass(particles);
    f.center_of_mass = particles.empty() ? Vec2{} : center_of_mass(particles);
    f.density = deposit_mass(particles, grid);
    f.potential = solve_field(f.density, grid, f.total_mass, f.center_of_mass, gamma,
                              options, warm_start, report);
    gradient_field(f.potential, grid, f.grad_x, f.grad_y);
    return f;
}

//---------------------------------------------------------------------------//
// Snapshot I/O
//---------------------------------------------------------------------------//
void write_matrix(std::filesystem::path const& path, std::span<double const> values,
                  Grid const& grid)
{
    if (values.size() != grid.size())
        throw DomainError("write_matrix: value count does not match the grid");
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open snapshot for writing", path.string());
    std::string line;
    for (std::size_t j = 0; j < grid.ny(); ++j)
    {
        line.clear();
        for (std::size_t i = 0; i < grid.nx(); ++i)
        {
            if (i)
                line += ' ';
            line += format_double(values[grid.index(i, j)]);
        }
        line += '\n';
        out << line;
    }
    if (!out)
        throw IoError("failed writing snapshot", path.string());
}

std::vector<double> read_matrix(std::filesystem::path const& path, Grid const& grid)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open snapshot for reading", path.string());
    std::vector<double> values;
    values.reserve(grid.size());
    std::string line;
    while (std::getline(in, line))
    {
        std::istringstream row(line);
        std::string token;
        std::size_t count = 0;
        while (row >> token)
        {
            values.push_back(parse_double(token, "snapshot entry"));
            ++count;
        }
        if (count != 0 && count != grid.nx())
            throw IoError("snapshot row has the wrong number of columns", path.string());
    }
    if (values.size() != grid.size())
        throw IoError("snapshot has the wrong number of rows", path.string());
    return values;
}
}  // namespace coalesce
