#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "coalescence.hpp"
#include "diagnostics.hpp"
#include "dynamics.hpp"
#include "model.hpp"

namespace coalesce
{
enum class RunMode
{
    Pks,
    Mpks,
    RawParticles
};

enum class BumpProfile
{
    Mollifier,  // exp(-1 / (1 - r^2)) on the unit disc
    Uniform
};

char const* to_string(RunMode mode) noexcept;
char const* to_string(BumpProfile profile) noexcept;

/*!
 * Compactly supported blob of particles.
 *
 * The support is an ellipse with semi-axes `axis_1` (along `angle`) and
 * `axis_2`; a disc has equal axes. In pks mode `weight` is the bump's share
 * of the total mass; in mpks mode it splits the species' particles between
 * that species' bumps.
 */
struct BumpSpec
{
    Vec2 center;
    double axis_1 = 1;
    double axis_2 = 1;
    double angle = 0;
    double weight = 1;
    int species = 0;
    BumpProfile profile = BumpProfile::Mollifier;
};

struct RawParticleSpec
{
    Vec2 position;
    double mass = 1;
    int species = 0;
};

struct RunConfig
{
    RunMode mode = RunMode::Pks;

    double chi = 1;
    double mu = 1;          // pks
    double mass = 1;        // pks
    double mu_tilde = 1;    // raw-particles
    std::vector<Species> species;  // mpks
    std::size_t n0 = 1000;

    std::vector<BumpSpec> bumps;
    std::vector<RawParticleSpec> particles;

    double x0 = -1, x1 = 1, y0 = -1, y1 = 1;
    std::size_t nx = 65;

    double dt = 1e-3;
    double t_end = 0.1;
    double eta = 0.1;
    double p = 0.01;
    int max_depth = 40;
    MergeRule merge_rule = MergeRule::MomentHitsZero;

    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string output_dir;          // empty: nothing written
    std::size_t snapshot_stride = 0;  // macro steps between snapshots; 0 disables
    std::size_t record_stride = 1;

    void validate() const;
};

RunConfig parse_config(std::string const& text);
RunConfig load_config(std::filesystem::path const& path);
std::string format_config(RunConfig const& config);
void save_config(std::filesystem::path const& path, RunConfig const& config);

/// Positions drawn i.i.d. from the profile on the unit disc, mapped onto the bump.
std::vector<Vec2> sample_bump(BumpSpec const& bump, std::size_t count, Stream& rng);

/// Equal-mass particles on a disc of radius `radius`.
std::vector<Particle> sample_bump_disc(Vec2 center, double radius, double mass,
                                       std::size_t count, Stream& rng,
                                       BumpProfile profile = BumpProfile::Mollifier);
/// Equal-mass particles on an ellipse; `axes` are the semi-axes, the first along `angle`.
std::vector<Particle> sample_bump_ellipse(Vec2 center, Vec2 axes, double angle, double mass,
                                          std::size_t count, Stream& rng,
                                          BumpProfile profile = BumpProfile::Mollifier);

/// E|X - center|^2 for a unit-radius profile (1-D quadrature).
double profile_second_moment(BumpProfile profile);

std::vector<std::string> preset_names();
RunConfig preset(std::string const& name);

/// Particles, parameters and species count for a config.
struct InitialState
{
    SystemState state;
    std::size_t species_count = 0;
    double mu = 0;  // the PDE diffusivity used for the atom threshold
};

InitialState initial_state(RunConfig const& config);

struct RunResult
{
    SystemState final_state;
    std::vector<MomentRecord> records;
    std::vector<MergeEvent> events;
    std::size_t steps = 0;
};

using StepObserver = std::function<void(SystemState const&, StepReport const&)>;

/*!
 * Run macro steps to t_end.
 *
 * When `output_dir` is set, writes timeseries.csv, events.csv, the resolved
 * config and density/potential snapshots every `snapshot_stride` steps.
 */
RunResult run(RunConfig const& config, StepObserver const& observer = {});

/// Output directory from the environment (COALESCE_OUTPUT_DIR), if set.
std::optional<std::filesystem::path> default_output_dir();
}  // namespace coalesce
