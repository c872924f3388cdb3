#include "coalesce/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "coalesce/errors.hpp"

namespace coalesce
{
double choose_substep(double drift, double sigma, double dx, double remaining)
{
    if (!(dx > 0))
        throw DomainError("choose_substep: dx must be positive");
    if (!(remaining > 0))
        throw DomainError("choose_substep: remaining time must be positive");
    double h = remaining;
    if (drift > 0)
        h = std::min(h, dx / (2 * drift));
    if (sigma > 0)
    {
        double const r = dx / (2 * sigma);
        h = std::min(h, r * r);
    }
    return std::max(h, std::numeric_limits<double>::min());
}

AdvanceResult advance_particle(Particle const& particle, double dt, Field const& field,
                               SystemParams const& params, Stream& rng,
                               std::uint64_t max_substeps)
{
    if (!(dt > 0))
        throw DomainError("advance_particle: dt must be positive");
    double const sigma = sigma_of_mass(particle.mass, params);
    double const dx = field.grid.dx();

    AdvanceResult out{particle.position, {}};
    double elapsed = 0;
    while (elapsed < dt)
    {
        Vec2 const drift = params.chi * sample_gradient(out.position, field);
        double h = choose_substep(norm(drift), sigma, dx, dt - elapsed);
        // Land exactly on dt; the clock never drifts.
        if (elapsed + h >= dt)
            h = dt - elapsed;
        Vec2 const dw = std::sqrt(h) * normal_pair(rng);
        out.position += h * drift + sigma * dw;
        out.ledger.increment += dw;
        elapsed = (h == dt - elapsed) ? dt : elapsed + h;
        ++out.ledger.substeps;

        if (!is_finite(out.position))
            throw StepError("particle position became non-finite", particle.id);
        if (out.ledger.substeps >= max_substeps && elapsed < dt)
            throw StepError("substep budget exhausted", particle.id);
    }
    out.ledger.elapsed = elapsed;
    return out;
}

namespace
{
template<class F>
void parallel_for(std::size_t n, unsigned threads, F&& body)
{
    if (threads <= 1 || n < 2 * threads)
    {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    std::size_t const chunk = (n + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t)
    {
        std::size_t const lo = t * chunk;
        std::size_t const hi = std::min(n, lo + chunk);
        pool.emplace_back([&, t, lo, hi] {
            try
            {
                for (std::size_t i = lo; i < hi; ++i)
                    body(i);
            }
            catch (...)
            {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool)
        th.join();
    for (auto& e : errors)
    {
        if (e)
            std::rethrow_exception(e);
    }
}
}  // namespace

Stepper::Stepper(Grid grid, StepOptions options)
    : grid_(std::move(grid)), options_(options)
{
    if (options_.threads == 0)
        options_.threads = std::max(1u, std::thread::hardware_concurrency());
}

StepReport Stepper::step(SystemState& state, double dt)
{
    if (!(dt > 0))
        throw DomainError("macro_step: dt must be positive");
    state.params.validate();

    StepReport report;
    auto& particles = state.particles;

    // Phase 1: candidate clusters from the pre-move snapshot.
    std::vector<Particle> const start = particles;
    auto const cells = detect_clusters(start, dt, state.params, options_.detection);
    report.clusters = cells.size();

    // Phase 2: frozen field, independent particle updates.
    field_ = build_field(particles, grid_, state.params.gamma, options_.solver,
                         field_.potential, &report.solve);
    std::vector<NoiseLedgerEntry> ledgers(particles.size());
    auto const minor = static_cast<std::uint32_t>(state.step);
    parallel_for(particles.size(), options_.threads, [&](std::size_t i) {
        Stream rng(options_.seed, start[i].id, minor);
        auto r = advance_particle(start[i], dt, field_, state.params, rng,
                                  options_.max_substeps);
        particles[i].position = r.position;
        ledgers[i] = r.ledger;
    });
    for (auto const& l : ledgers)
    {
        report.total_substeps += l.substeps;
        report.max_substeps = std::max(report.max_substeps, l.substeps);
    }
    state.time += dt;

    // Phase 3: second-moment update per cell, then merges in cell order.
    std::vector<std::vector<std::size_t>> groups;
    for (auto const& cell : cells)
    {
        bool fire = true;
        if (cell.second_moment > 0)
        {
            double const noise = cluster_noise_increment(start, cell, ledgers);
            double const dy = cluster_moment_update(cell, dt, noise);
            fire = merge_fires(cell.second_moment, dy, options_.merge_rule);
        }
        if (fire)
            groups.push_back(cell.members);
    }
    if (!groups.empty())
        report.merges = merge_clusters(state, groups);
    ++state.step;
    return report;
}

StepReport macro_step(SystemState& state, double dt, Grid const& grid,
                      StepOptions const& options)
{
    Stepper stepper(grid, options);
    return stepper.step(state, dt);
}
}  // namespace coalesce
