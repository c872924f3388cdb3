#include "coalesce/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "coalesce/errors.hpp"
#include "coalesce/format.hpp"

namespace coalesce
{
namespace pt = boost::property_tree;
using std::numbers::pi;

char const* to_string(RunMode mode) noexcept
{
    switch (mode)
    {
        case RunMode::Pks:
            return "pks";
        case RunMode::Mpks:
            return "mpks";
        case RunMode::RawParticles:
            return "raw-particles";
    }
    return "?";
}

char const* to_string(BumpProfile profile) noexcept
{
    switch (profile)
    {
        case BumpProfile::Mollifier:
            return "mollifier";
        case BumpProfile::Uniform:
            return "uniform";
    }
    return "?";
}

namespace
{
RunMode parse_mode(std::string const& s)
{
    for (auto m : {RunMode::Pks, RunMode::Mpks, RunMode::RawParticles})
    {
        if (s == to_string(m))
            return m;
    }
    throw ConfigError("unknown mode '" + s + "' (expected pks, mpks or raw-particles)");
}

BumpProfile parse_profile(std::string const& s)
{
    for (auto p : {BumpProfile::Mollifier, BumpProfile::Uniform})
    {
        if (s == to_string(p))
            return p;
    }
    throw ConfigError("unknown bump profile '" + s + "' (expected mollifier or uniform)");
}

void require(bool ok, std::string const& message)
{
    if (!ok)
        throw ConfigError(message);
}
}  // namespace

void RunConfig::validate() const
{
    require(std::isfinite(chi) && chi >= 0, "chi must be non-negative");
    require(dt > 0 && std::isfinite(dt), "dt must be positive");
    require(t_end >= 0 && std::isfinite(t_end), "t_end must be non-negative");
    require(eta > 0 && eta < 1, "eta must lie in (0, 1)");
    require(p > 0 && p < 1, "p must lie in (0, 1)");
    require(max_depth >= 1, "max_depth must be at least 1");
    require(nx >= 3, "nx must be at least 3");
    require(x1 > x0 && y1 > y0, "grid box must have positive extent");
    require(record_stride >= 1, "record_stride must be at least 1");
    switch (mode)
    {
        case RunMode::Pks:
            require(mu > 0 && mass > 0, "pks mode needs positive mu and mass");
            require(n0 >= 1, "n0 must be at least 1");
            require(!bumps.empty(), "pks mode needs at least one bump");
            break;
        case RunMode::Mpks:
            require(!species.empty(), "mpks mode needs at least one species");
            require(n0 >= species.size(), "n0 must cover every species");
            for (std::size_t k = 0; k < species.size(); ++k)
            {
                require(species[k].mass > 0 && species[k].mu > 0,
                        "species masses and diffusivities must be positive");
                bool const has_bump = std::any_of(bumps.begin(), bumps.end(), [&](auto const& b) {
                    return b.species == static_cast<int>(k);
                });
                require(has_bump, "every species needs at least one bump");
            }
            break;
        case RunMode::RawParticles:
            require(mu_tilde > 0, "raw-particles mode needs positive mu_tilde");
            require(!particles.empty(), "raw-particles mode needs at least one particle");
            for (auto const& q : particles)
                require(q.mass > 0 && is_finite(q.position), "particles need positive mass");
            break;
    }
    for (auto const& b : bumps)
    {
        require(b.axis_1 > 0 && b.axis_2 > 0, "bump axes must be positive");
        require(b.weight > 0, "bump weight must be positive");
        require(b.species >= 0, "bump species must be non-negative");
        if (mode == RunMode::Mpks)
            require(static_cast<std::size_t>(b.species) < species.size(),
                    "bump refers to an undefined species");
    }
}

//---------------------------------------------------------------------------//
// Config file
//---------------------------------------------------------------------------//
namespace
{
class Section
{
  public:
    Section(pt::ptree const& tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    ~Section() noexcept(false)
    {
        if (std::uncaught_exceptions())
            return;
        for (auto const& [key, value] : tree_)
        {
            if (!used_.count(key))
                throw ConfigError("unknown key '" + key + "' in [" + name_ + "]");
        }
    }

    std::optional<std::string> raw(std::string const& key)
    {
        used_.insert(key);
        if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '\0')))
            return *v;
        return std::nullopt;
    }

    void get(std::string const& key, double& out)
    {
        if (auto v = raw(key))
            out = parse_double(*v, name_ + "." + key);
    }
    template<class Int>
        requires std::is_integral_v<Int>
    void get(std::string const& key, Int& out)
    {
        if (auto v = raw(key))
        {
            auto const n = parse_integer(*v, name_ + "." + key);
            if (std::is_unsigned_v<Int> && n < 0)
                throw ConfigError(name_ + "." + key + " must be non-negative");
            out = static_cast<Int>(n);
        }
    }
    void get(std::string const& key, std::string& out)
    {
        if (auto v = raw(key))
            out = *v;
    }

  private:
    pt::ptree const& tree_;
    std::string name_;
    std::set<std::string> used_;
};

bool has_prefix(std::string const& s, std::string const& prefix)
{
    return s.size() > prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}
}  // namespace

RunConfig parse_config(std::string const& text)
{
    pt::ptree tree;
    std::istringstream in(text);
    try
    {
        pt::ini_parser::read_ini(in, tree);
    }
    catch (pt::ini_parser_error const& e)
    {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }

    for (auto const& [name, body] : tree)
    {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + name + "' outside of any section");
    }
    // The INI reader drops sections without keys; a bare [bump-1] still
    // means a default bump, so walk the headers as written.
    std::vector<std::string> headers;
    {
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line))
        {
            auto const first = line.find_first_not_of(" \t");
            auto const last = line.find_last_not_of(" \t\r");
            if (first == std::string::npos || line[first] != '[' || line[last] != ']')
                continue;
            auto name = line.substr(first + 1, last - first - 1);
            auto const a = name.find_first_not_of(" \t");
            auto const b = name.find_last_not_of(" \t");
            headers.push_back(a == std::string::npos ? "" : name.substr(a, b - a + 1));
        }
    }

    RunConfig c;
    pt::ptree const empty;
    for (auto const& name : headers)
    {
        auto const found = tree.get_child_optional(pt::ptree::path_type(name, '\0'));
        pt::ptree const& body = found ? *found : empty;
        Section s(body, name);
        if (name == "run")
        {
            std::string mode = to_string(c.mode);
            std::string rule = to_string(c.merge_rule);
            s.get("mode", mode);
            c.mode = parse_mode(mode);
            s.get("n0", c.n0);
            s.get("dt", c.dt);
            s.get("t_end", c.t_end);
            s.get("seed", c.seed);
            s.get("threads", c.threads);
            s.get("output_dir", c.output_dir);
            s.get("snapshot_stride", c.snapshot_stride);
            s.get("record_stride", c.record_stride);
            s.get("merge_rule", rule);
            c.merge_rule = parse_merge_rule(rule);
        }
        else if (name == "physics")
        {
            s.get("chi", c.chi);
            s.get("mu", c.mu);
            s.get("mass", c.mass);
            s.get("mu_tilde", c.mu_tilde);
        }
        else if (name == "grid")
        {
            s.get("x0", c.x0);
            s.get("x1", c.x1);
            s.get("y0", c.y0);
            s.get("y1", c.y1);
            s.get("nx", c.nx);
        }
        else if (name == "detection")
        {
            s.get("eta", c.eta);
            s.get("p", c.p);
            s.get("max_depth", c.max_depth);
        }
        else if (has_prefix(name, "species-"))
        {
            Species sp;
            s.get("mass", sp.mass);
            s.get("mu", sp.mu);
            c.species.push_back(sp);
        }
        else if (has_prefix(name, "bump-"))
        {
            BumpSpec b;
            std::string profile = to_string(b.profile);
            s.get("x", b.center.x);
            s.get("y", b.center.y);
            s.get("axis_1", b.axis_1);
            s.get("axis_2", b.axis_2);
            s.get("angle", b.angle);
            s.get("weight", b.weight);
            s.get("species", b.species);
            s.get("profile", profile);
            b.profile = parse_profile(profile);
            c.bumps.push_back(b);
        }
        else if (has_prefix(name, "particle-"))
        {
            RawParticleSpec q;
            s.get("x", q.position.x);
            s.get("y", q.position.y);
            s.get("mass", q.mass);
            s.get("species", q.species);
            c.particles.push_back(q);
        }
        else
        {
            throw ConfigError("unknown section [" + name + "]");
        }
    }
    c.validate();
    return c;
}

RunConfig load_config(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config", path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string format_config(RunConfig const& c)
{
    std::string out;
    auto section = [&](std::string const& name) {
        if (!out.empty())
            out += '\n';
        out += "[" + name + "]\n";
    };
    auto put = [&](char const* key, std::string const& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    auto num = [&](char const* key, double v) { put(key, format_double(v)); };
    auto integer = [&](char const* key, auto v) { put(key, std::to_string(v)); };

    section("run");
    put("mode", to_string(c.mode));
    integer("n0", c.n0);
    num("dt", c.dt);
    num("t_end", c.t_end);
    integer("seed", c.seed);
    integer("threads", c.threads);
    if (!c.output_dir.empty())
        put("output_dir", c.output_dir);
    integer("snapshot_stride", c.snapshot_stride);
    integer("record_stride", c.record_stride);
    put("merge_rule", to_string(c.merge_rule));

    section("physics");
    num("chi", c.chi);
    num("mu", c.mu);
    num("mass", c.mass);
    num("mu_tilde", c.mu_tilde);

    section("grid");
    num("x0", c.x0);
    num("x1", c.x1);
    num("y0", c.y0);
    num("y1", c.y1);
    integer("nx", c.nx);

    section("detection");
    num("eta", c.eta);
    num("p", c.p);
    integer("max_depth", c.max_depth);

    for (std::size_t k = 0; k < c.species.size(); ++k)
    {
        section("species-" + std::to_string(k + 1));
        num("mass", c.species[k].mass);
        num("mu", c.species[k].mu);
    }
    for (std::size_t k = 0; k < c.bumps.size(); ++k)
    {
        auto const& b = c.bumps[k];
        section("bump-" + std::to_string(k + 1));
        num("x", b.center.x);
        num("y", b.center.y);
        num("axis_1", b.axis_1);
        num("axis_2", b.axis_2);
        num("angle", b.angle);
        num("weight", b.weight);
        integer("species", b.species);
        put("profile", to_string(b.profile));
    }
    for (std::size_t k = 0; k < c.particles.size(); ++k)
    {
        auto const& q = c.particles[k];
        section("particle-" + std::to_string(k + 1));
        num("x", q.position.x);
        num("y", q.position.y);
        num("mass", q.mass);
        integer("species", q.species);
    }
    return out;
}

void save_config(std::filesystem::path const& path, RunConfig const& config)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write config", path.string());
    out << format_config(config);
    if (!out)
        throw IoError("failed while writing config", path.string());
}

//---------------------------------------------------------------------------//
// Initial conditions
//---------------------------------------------------------------------------//
namespace
{
double profile_density(BumpProfile profile, double r2)
{
    if (profile == BumpProfile::Uniform)
        return 1;
    return std::exp(1 - 1 / (1 - r2));  // normalized to 1 at the center
}
}  // namespace

std::vector<Vec2> sample_bump(BumpSpec const& bump, std::size_t count, Stream& rng)
{
    if (!(bump.axis_1 > 0) || !(bump.axis_2 > 0))
        throw DomainError("sample_bump: axes must be positive");
    Vec2 const e1{std::cos(bump.angle), std::sin(bump.angle)};
    Vec2 const e2{-e1.y, e1.x};
    std::vector<Vec2> out;
    out.reserve(count);
    while (out.size() < count)
    {
        double const r2 = uniform01(rng);
        double const theta = 2 * pi * uniform01(rng);
        if (uniform01(rng) > profile_density(bump.profile, r2))
            continue;
        double const r = std::sqrt(r2);
        Vec2 const u{r * std::cos(theta), r * std::sin(theta)};
        out.push_back(bump.center + (bump.axis_1 * u.x) * e1 + (bump.axis_2 * u.y) * e2);
    }
    return out;
}

namespace
{
std::vector<Particle> equal_mass_particles(std::vector<Vec2> const& positions, double mass)
{
    std::vector<Particle> out;
    out.reserve(positions.size());
    double const m = mass / static_cast<double>(positions.size());
    ParticleId id = 0;
    for (auto const& x : positions)
        out.push_back({id++, x, m, 0});
    return out;
}
}  // namespace

std::vector<Particle> sample_bump_disc(Vec2 center, double radius, double mass,
                                       std::size_t count, Stream& rng, BumpProfile profile)
{
    if (count == 0)
        throw DomainError("sample_bump_disc: count must be at least one");
    BumpSpec b{center, radius, radius, 0, 1, 0, profile};
    return equal_mass_particles(sample_bump(b, count, rng), mass);
}

std::vector<Particle> sample_bump_ellipse(Vec2 center, Vec2 axes, double angle, double mass,
                                          std::size_t count, Stream& rng,
                                          BumpProfile profile)
{
    if (count == 0)
        throw DomainError("sample_bump_ellipse: count must be at least one");
    BumpSpec b{center, axes.x, axes.y, angle, 1, 0, profile};
    return equal_mass_particles(sample_bump(b, count, rng), mass);
}

double profile_second_moment(BumpProfile profile)
{
    if (profile == BumpProfile::Uniform)
        return 0.5;
    // Composite Simpson in r on [0, 1]; the integrand is smooth and flat at r = 1.
    constexpr int n = 20000;
    double num = 0;
    double den = 0;
    for (int k = 0; k <= n; ++k)
    {
        double const r = static_cast<double>(k) / n;
        double const f = k == n ? 0.0 : profile_density(profile, r * r);
        double const w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
        num += w * r * r * r * f;
        den += w * r * f;
    }
    return num / den;
}

InitialState initial_state(RunConfig const& c)
{
    c.validate();
    InitialState init;
    auto& state = init.state;
    auto& ps = state.particles;

    auto place = [&](std::size_t bump_index, std::size_t count, double particle_mass,
                     int species) {
        if (count == 0)
            return;
        Stream rng(c.seed, bump_index, kInitialConditionStream);
        for (auto const& x : sample_bump(c.bumps[bump_index], count, rng))
            ps.push_back({0, x, particle_mass, species});
    };
    auto bump_counts = [&](std::vector<std::size_t> const& which, std::size_t total) {
        std::vector<double> w;
        for (auto i : which)
            w.push_back(c.bumps[i].weight);
        return apportion(w, total);
    };

    switch (c.mode)
    {
        case RunMode::Pks:
        {
            auto const setup = pks_to_particles(c.chi, c.mu, c.mass, c.n0);
            state.params = setup.params;
            init.species_count = 1;
            init.mu = c.mu;
            std::vector<std::size_t> all(c.bumps.size());
            for (std::size_t i = 0; i < all.size(); ++i)
                all[i] = i;
            auto const counts = bump_counts(all, c.n0);
            for (std::size_t i = 0; i < all.size(); ++i)
                place(i, counts[i], setup.species[0].particle_mass, 0);
            break;
        }
        case RunMode::Mpks:
        {
            auto const setup = mpks_to_particles(c.chi, c.species, c.n0);
            state.params = setup.params;
            init.species_count = c.species.size();
            init.mu = setup.mu;
            for (std::size_t k = 0; k < c.species.size(); ++k)
            {
                std::vector<std::size_t> mine;
                for (std::size_t i = 0; i < c.bumps.size(); ++i)
                {
                    if (c.bumps[i].species == static_cast<int>(k))
                        mine.push_back(i);
                }
                auto const counts = bump_counts(mine, setup.species[k].count);
                for (std::size_t j = 0; j < mine.size(); ++j)
                    place(mine[j], counts[j], setup.species[k].particle_mass,
                          static_cast<int>(k));
            }
            break;
        }
        case RunMode::RawParticles:
        {
            state.params = {c.chi, c.mu_tilde, kLogKernelGamma};
            int top = 0;
            for (auto const& q : c.particles)
            {
                ps.push_back({0, q.position, q.mass, q.species});
                top = std::max(top, q.species);
            }
            init.species_count = static_cast<std::size_t>(top) + 1;
            init.mu = c.mu_tilde * static_cast<double>(ps.size()) / total_mass(ps);
            break;
        }
    }
    for (std::size_t i = 0; i < ps.size(); ++i)
        ps[i].id = i;
    state.next_id = ps.size();
    state.params.validate();
    return init;
}

//---------------------------------------------------------------------------//
// Presets
//---------------------------------------------------------------------------//
std::vector<std::string> preset_names()
{
    return {"pks-mass-transfer", "pks-two-singularities", "mpks-symmetric",
            "mpks-asymmetric",   "mpks-disjoint",         "three-particle-moment"};
}

RunConfig preset(std::string const& name)
{
    RunConfig c;
    c.snapshot_stride = 50;
    if (name == "pks-mass-transfer")
    {
        double const mc = 8 * pi;
        c.mode = RunMode::Pks;
        c.chi = 1;
        c.mu = 1;
        c.mass = 6 * mc;
        c.n0 = 40'000;
        // Uniform blobs: the heavy disc then collapses near t = 0.05. Keeping
        // the pair close to the middle keeps the quadrupole the monopole
        // boundary data ignores small.
        c.bumps = {{{-3, 0}, 1, 1, 0, 4 * mc, 0, BumpProfile::Uniform},
                   {{3, 0}, 7, 1, pi / 2, 2 * mc, 0, BumpProfile::Uniform}};
        c.x0 = c.y0 = -12;
        c.x1 = c.y1 = 12;
        c.nx = 128;
        c.dt = 1e-3;
        c.t_end = 0.25;
    }
    else if (name == "pks-two-singularities")
    {
        c.mode = RunMode::Pks;
        c.chi = 1;
        c.mu = 1;
        c.mass = 8 * pi;
        c.n0 = 400'000;
        c.bumps = {{{3, 1}, 0.5, 0.5, 0, 12 * pi / 5, 0, BumpProfile::Uniform},
                   {{-3, -1}, 0.5, 0.5, 0, 28 * pi / 5, 0, BumpProfile::Uniform}};
        c.x0 = c.y0 = -15;
        c.x1 = c.y1 = 15;
        c.nx = 270;
        c.dt = 0.002;
        c.t_end = 4;
    }
    else if (name == "mpks-symmetric" || name == "mpks-asymmetric" || name == "mpks-disjoint")
    {
        double const a = 0.35;
        c.mode = RunMode::Mpks;
        c.chi = 4;
        c.species = {{4, 35.0 / 2}, {24, 35.0 / 12}};
        c.n0 = 1'000'000;
        if (name == "mpks-symmetric")
            c.bumps = {{{0, 0}, a, a, 0, 1, 0, BumpProfile::Uniform},
                       {{0, 0}, a, a, 0, 1, 1, BumpProfile::Uniform}};
        else if (name == "mpks-asymmetric")
            c.bumps = {{{0, 0}, a, a, 0, 1, 0, BumpProfile::Uniform},
                       {{0.1, 0}, 2 * a, a / 2, pi / 2, 1, 1, BumpProfile::Uniform}};
        else
            c.bumps = {{{a, -a}, a, a, 0, 1, 0, BumpProfile::Uniform},
                       {{-a, a}, a, a, 0, 1, 1, BumpProfile::Uniform}};
        c.x0 = c.y0 = -1.5;
        c.x1 = c.y1 = 1.5;
        c.nx = 320;
        // The frozen field lags the contracting heavy component; larger steps
        // bias the expansion rate upward.
        c.dt = 2.5e-5;
        c.t_end = 0.01;
    }
    else if (name == "three-particle-moment")
    {
        double const theta = pi / 12;
        c.mode = RunMode::RawParticles;
        c.chi = 10;
        c.mu_tilde = 10;
        c.particles = {{{0, 0.1}, 20, 0},
                       {{0, -0.1}, 20, 0},
                       {{0.8 * std::cos(theta), 0.8 * std::sin(theta)}, 100, 0}};
        c.n0 = 3;
        c.x0 = c.y0 = -2;
        c.x1 = c.y1 = 2;
        c.nx = 129;
        c.dt = 1e-5;
        c.t_end = 1e-3;
        c.snapshot_stride = 0;
    }
    else
    {
        std::string known;
        for (auto const& n : preset_names())
            known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
    }
    c.validate();
    return c;
}

//---------------------------------------------------------------------------//
// Run loop
//---------------------------------------------------------------------------//
std::optional<std::filesystem::path> default_output_dir()
{
    if (char const* env = std::getenv("COALESCE_OUTPUT_DIR"); env && *env)
        return std::filesystem::path(env);
    return std::nullopt;
}

RunResult run(RunConfig const& config, StepObserver const& observer)
{
    auto init = initial_state(config);
    auto& state = init.state;
    double const atom_threshold = config.chi > 0 ? critical_mass(config.chi, init.mu)
                                                 : std::numeric_limits<double>::infinity();

    StepOptions options;
    options.detection = {config.eta, config.p, config.max_depth};
    options.merge_rule = config.merge_rule;
    options.seed = config.seed;
    options.threads = config.threads;
    Stepper stepper(Grid::square_cells(config.x0, config.x1, config.y0, config.y1, config.nx),
                    options);

    std::filesystem::path const dir = config.output_dir;
    bool const writing = !dir.empty();
    std::ofstream series;
    std::ofstream events;
    if (writing)
    {
        std::filesystem::create_directories(dir);
        save_config(dir / "config.ini", config);
        series.open(dir / "timeseries.csv");
        events.open(dir / "events.csv");
        if (!series || !events)
            throw IoError("cannot create output files", dir.string());
        write_series_header(series, init.species_count);
        write_events_header(events);
    }

    RunResult result;
    auto keep = [&](MomentRecord r) {
        if (writing)
            write_series_row(series, r);
        result.records.push_back(std::move(r));
    };
    keep(record(state, init.species_count, atom_threshold));

    auto const n_steps = static_cast<std::size_t>(std::llround(config.t_end / config.dt));
    for (std::size_t k = 1; k <= n_steps; ++k)
    {
        auto report = stepper.step(state, config.dt);
        if (observer)
            observer(state, report);
        for (auto& ev : report.merges)
        {
            if (writing)
                write_event(events, ev);
            result.events.push_back(std::move(ev));
        }
        if (k % config.record_stride == 0 || k == n_steps)
            keep(record(state, init.species_count, atom_threshold));
        if (writing && config.snapshot_stride && k % config.snapshot_stride == 0)
            write_snapshot(dir / "snapshots", stepper.field(), state.time - config.dt);
    }
    if (writing)
    {
        series.flush();
        events.flush();
        if (!series || !events)
            throw IoError("failed while writing outputs", dir.string());
    }
    result.steps = n_steps;
    result.final_state = std::move(state);
    return result;
}
}  // namespace coalesce
