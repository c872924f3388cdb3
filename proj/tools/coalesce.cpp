// Command-line front end: run configs and presets, or evaluate predictors.
#include <chrono>
#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coalesce/bessel.hpp"
#include "coalesce/diagnostics.hpp"
#include "coalesce/errors.hpp"
#include "coalesce/experiments.hpp"
#include "coalesce/format.hpp"

namespace
{
using namespace coalesce;

void print(std::string const& key, double value)
{
    std::cout << key << " = " << format_double(value) << '\n';
}

int execute(RunConfig config, bool quiet)
{
    auto const t0 = std::chrono::steady_clock::now();
    std::size_t step = 0;
    auto const total = static_cast<std::size_t>(std::llround(config.t_end / config.dt));
    std::size_t const every = std::max<std::size_t>(1, total / 20);
    auto observer = [&](SystemState const& s, StepReport const& r) {
        ++step;
        if (quiet || (step % every && r.merges.empty()))
            return;
        std::cerr << "t=" << format_double(s.time) << " particles=" << s.particles.size()
                  << " clusters=" << r.clusters << " merges=" << r.merges.size()
                  << " cg_iters=" << r.solve.iterations << '\n';
    };
    auto const result = run(config, observer);
    double const secs
        = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "steps = " << result.steps << '\n'
              << "merges = " << result.events.size() << '\n'
              << "particles = " << result.final_state.particles.size() << '\n';
    print("final_time", result.final_state.time);
    print("wall_seconds", secs);
    if (!config.output_dir.empty())
        std::cout << "output = " << config.output_dir << '\n';
    return 0;
}

std::string resolve_out(std::string const& flag, std::string const& from_config,
                        std::string const& fallback)
{
    if (!flag.empty())
        return flag;
    if (!from_config.empty())
        return from_config;
    if (auto env = default_output_dir())
        return (*env / fallback).string();
    return fallback;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Coalescing particle simulator for logarithmic-kernel systems"};
    app.require_subcommand(1);

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Run the simulation described by a config file");
    std::string config_path;
    std::string sim_out;
    unsigned sim_threads = 0;
    bool sim_quiet = false;
    simulate->add_option("config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", sim_out, "Output directory");
    simulate->add_option("--threads", sim_threads, "Worker threads (1 is bit-reproducible)");
    simulate->add_flag("--quiet", sim_quiet, "No progress lines");

    // preset
    auto* pre = app.add_subcommand("preset", "Run (or print) a built-in experiment");
    std::string preset_name;
    std::size_t particles = 0;
    std::uint64_t seed = 0;
    std::string pre_out;
    double t_end = 0;
    unsigned pre_threads = 0;
    bool print_only = false;
    bool pre_quiet = false;
    pre->add_option("name", preset_name, "Preset name")
        ->required()
        ->check(CLI::IsMember(preset_names()));
    auto* particles_opt = pre->add_option("--particles", particles, "Particle count N0");
    auto* seed_opt = pre->add_option("--seed", seed, "Random seed");
    pre->add_option("--out", pre_out, "Output directory");
    auto* t_end_opt = pre->add_option("--t-end", t_end, "Final time");
    pre->add_option("--threads", pre_threads, "Worker threads (1 is bit-reproducible)");
    pre->add_flag("--print-config", print_only, "Print the config and exit");
    pre->add_flag("--quiet", pre_quiet, "No progress lines");

    // predict
    auto* predict = app.add_subcommand("predict", "Evaluate theoretical predictors");
    predict->require_subcommand(1);

    auto* slope = predict->add_subcommand("slope", "Second-moment rate with point masses");
    double s_mass = 0, s_mu = 1, s_chi = 1;
    std::vector<double> s_atoms;
    slope->add_option("--mass", s_mass, "Total mass M")->required();
    slope->add_option("--mu", s_mu, "Diffusivity mu");
    slope->add_option("--chi", s_chi, "Chemosensitivity chi");
    slope->add_option("--atom", s_atoms, "Point-mass masses");

    auto* blowup = predict->add_subcommand("blowup", "Multispecies moment rate and blow-up condition");
    double b_chi = 1;
    std::vector<double> b_mu, b_mass;
    blowup->add_option("--chi", b_chi, "Chemosensitivity chi");
    blowup->add_option("--mu", b_mu, "Species diffusivities")->required();
    blowup->add_option("--mass", b_mass, "Species masses")->required();

    auto* mmax = predict->add_subcommand("mmax", "Largest component masses of an expanding blow-up");
    double m_chi = 1, m_mu1 = 0, m_mu2 = 0;
    mmax->add_option("--chi", m_chi, "Chemosensitivity chi");
    mmax->add_option("--mu1", m_mu1, "Diffusivity of the fast component")->required();
    mmax->add_option("--mu2", m_mu2, "Diffusivity of the slow component")->required();

    auto* index = predict->add_subcommand("index", "Squared-Bessel index of a particle system");
    double i_chi = 1, i_mu = 1, i_mass = 0, i_mu_tilde = 0;
    std::size_t i_n = 0;
    std::vector<double> i_masses;
    index->add_option("--chi", i_chi, "Chemosensitivity chi");
    index->add_option("--mu", i_mu, "PDE diffusivity (with --mass and --particles)");
    index->add_option("--mass", i_mass, "Total mass (equal-mass system)");
    index->add_option("--particles", i_n, "Particle count (equal-mass system)");
    index->add_option("--masses", i_masses, "Explicit particle masses (needs --mu-tilde)");
    index->add_option("--mu-tilde", i_mu_tilde, "Particle noise constant");

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*simulate)
        {
            auto config = load_config(config_path);
            config.output_dir = resolve_out(sim_out, config.output_dir, "coalesce-out");
            if (sim_threads)
                config.threads = sim_threads;
            return execute(config, sim_quiet);
        }
        if (*pre)
        {
            auto config = preset(preset_name);
            if (*particles_opt)
                config.n0 = particles;
            if (*seed_opt)
                config.seed = seed;
            if (*t_end_opt)
                config.t_end = t_end;
            if (pre_threads)
                config.threads = pre_threads;
            config.validate();
            if (print_only)
            {
                std::cout << format_config(config);
                return 0;
            }
            config.output_dir = resolve_out(pre_out, "", preset_name);
            return execute(config, pre_quiet);
        }
        if (*slope)
        {
            print("slope", predicted_slope_regularized(s_mass, s_mu, s_chi, s_atoms));
            return 0;
        }
        if (*blowup)
        {
            if (b_mu.size() != b_mass.size())
                throw ConfigError("--mu and --mass need the same number of values");
            std::vector<SpeciesRate> species;
            for (std::size_t k = 0; k < b_mu.size(); ++k)
                species.push_back({b_mu[k], b_mass[k]});
            print("rate", mpks_moment_rate(b_chi, species));
            std::cout << "blowup = " << (mpks_blowup_condition(b_chi, species) ? "true" : "false")
                      << '\n';
            return 0;
        }
        if (*mmax)
        {
            auto const [m1, m2] = mpks_m_max(m_chi, m_mu1, m_mu2);
            print("m1_max", m1);
            print("m2_max", m2);
            return 0;
        }
        if (*index)
        {
            std::vector<double> masses = i_masses;
            SystemParams params{i_chi, i_mu_tilde, kLogKernelGamma};
            if (masses.empty())
            {
                if (!(i_mass > 0) || i_n == 0)
                    throw ConfigError("give --masses with --mu-tilde, or --mass and --particles");
                auto const setup = pks_to_particles(i_chi, i_mu, i_mass, i_n);
                params = setup.params;
                masses.assign(i_n, setup.species[0].particle_mass);
            }
            params.validate();
            double const nu = bessel_index(masses, params);
            auto const c = moment_coefficients(masses, params);
            print("nu", nu);
            std::cout << "origin = " << to_string(classify_origin(nu)) << '\n';
            print("alpha", c.alpha);
            print("beta", c.beta);
            return 0;
        }
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
