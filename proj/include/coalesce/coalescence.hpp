#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "clustering.hpp"
#include "model.hpp"

namespace coalesce
{
/// Wiener increment of one particle over a macro step (sqrt-time units).
struct NoiseLedgerEntry
{
    Vec2 increment;
    std::uint32_t substeps = 0;
    double elapsed = 0;
};

enum class MergeRule
{
    MomentHitsZero,  // Y~ + dY~ <= 0
    AnyDecrease      // dY~ <= 0
};

char const* to_string(MergeRule rule) noexcept;
MergeRule parse_merge_rule(std::string const& name);

struct MergeEvent
{
    double time = 0;
    std::vector<ParticleId> parents;
    ParticleId merged_id = 0;
    double mass = 0;
    Vec2 position;
};

/*!
 * Driving increment of the cell's second moment over the step.
 *
 * dW~ = (M' Y~)^(-1/2) sum_i sqrt(m_i) (X_i - X_cm) . dW^(i), with positions
 * taken at the start of the step (the cell snapshot). Has variance dt.
 */
double cluster_noise_increment(std::span<Particle const> start_positions,
                               ClusterCell const& cell,
                               std::span<NoiseLedgerEntry const> ledgers);

/// dY~ = alpha dt + 2 beta sqrt(Y~) dW~ with the cell's own coefficients.
double cluster_moment_update(ClusterCell const& cell, double dt, double noise) noexcept;

bool merge_fires(double second_moment, double increment, MergeRule rule) noexcept;

/*!
 * Replace `members` (indices into state.particles) by one particle.
 *
 * The new particle carries the summed mass, sits at the members' center of
 * mass, is tagged kMergedSpecies and receives a fresh id.
 */
MergeEvent merge_cluster(SystemState& state, std::span<std::size_t const> members);

/// Apply several disjoint merges at once, in the given order.
std::vector<MergeEvent> merge_clusters(SystemState& state,
                                       std::vector<std::vector<std::size_t>> const& groups);

void write_events_header(std::ostream& out);
void write_event(std::ostream& out, MergeEvent const& event);
std::vector<MergeEvent> read_events(std::filesystem::path const& path);
}  // namespace coalesce
