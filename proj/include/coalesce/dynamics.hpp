#pragma once

#include <cstdint>
#include <vector>

#include "clustering.hpp"
#include "coalescence.hpp"
#include "meanfield.hpp"
#include "model.hpp"
#include "random.hpp"

namespace coalesce
{
/*!
 * Substep length keeping the expected jump within the mesh.
 *
 * min(remaining, dx/(2b), (dx/(2 sigma))^2), ignoring bounds whose rate is
 * zero. Never returns zero for positive `remaining`.
 */
double choose_substep(double drift, double sigma, double dx, double remaining);

struct AdvanceResult
{
    Vec2 position;
    NoiseLedgerEntry ledger;
};

/*!
 * Euler-Maruyama over one macro step in a frozen field.
 *
 * The gradient is re-interpolated at every substep. Throws StepError when the
 * position becomes non-finite or the substep budget runs out.
 */
AdvanceResult advance_particle(Particle const& particle, double dt, Field const& field,
                               SystemParams const& params, Stream& rng,
                               std::uint64_t max_substeps = 100'000'000);

struct StepOptions
{
    DetectionOptions detection;
    MergeRule merge_rule = MergeRule::MomentHitsZero;
    SolverOptions solver;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::uint64_t max_substeps = 100'000'000;
};

struct StepReport
{
    std::size_t clusters = 0;
    std::vector<MergeEvent> merges;
    std::uint64_t total_substeps = 0;
    std::uint32_t max_substeps = 0;
    SolveReport solve;
};

/*!
 * Macro-step driver that keeps the last potential as a warm start.
 *
 * One step: detect clusters on the pre-move snapshot; solve the field and
 * advance every particle with its own stream (seed, id, step); update each
 * cluster's second moment from the noise ledgers and merge the ones that
 * collapse. Merge events are stamped with the end-of-step time.
 */
class Stepper
{
  public:
    Stepper(Grid grid, StepOptions options);

    StepReport step(SystemState& state, double dt);

    Grid const& grid() const noexcept { return grid_; }
    StepOptions const& options() const noexcept { return options_; }
    /// Field used by the most recent step (empty before the first).
    Field const& field() const noexcept { return field_; }

  private:
    Grid grid_;
    StepOptions options_;
    Field field_;
};

/// Stateless single step (no warm start).
StepReport macro_step(SystemState& state, double dt, Grid const& grid,
                      StepOptions const& options = {});
}  // namespace coalesce
