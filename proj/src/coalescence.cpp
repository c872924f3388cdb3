#include "coalesce/coalescence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "coalesce/errors.hpp"
#include "coalesce/format.hpp"

namespace coalesce
{
char const* to_string(MergeRule rule) noexcept
{
    switch (rule)
    {
        case MergeRule::MomentHitsZero:
            return "moment-hits-zero";
        case MergeRule::AnyDecrease:
            return "any-decrease";
    }
    return "?";
}

MergeRule parse_merge_rule(std::string const& name)
{
    if (name == "moment-hits-zero")
        return MergeRule::MomentHitsZero;
    if (name == "any-decrease")
        return MergeRule::AnyDecrease;
    throw ConfigError("unknown merge rule '" + name
                      + "' (expected moment-hits-zero or any-decrease)");
}

double cluster_noise_increment(std::span<Particle const> start_positions,
                               ClusterCell const& cell,
                               std::span<NoiseLedgerEntry const> ledgers)
{
    if (cell.members.size() < 2)
        throw DomainError("cluster_noise_increment: cell needs at least two members");
    if (!(cell.second_moment > 0))
        throw DomainError("cluster_noise_increment: zero second moment has no driving noise");
    double sum = 0;
    for (auto i : cell.members)
    {
        auto const& p = start_positions[i];
        sum += std::sqrt(p.mass) * dot(p.position - cell.center, ledgers[i].increment);
    }
    return sum / std::sqrt(cell.mass * cell.second_moment);
}

double cluster_moment_update(ClusterCell const& cell, double dt, double noise) noexcept
{
    auto const& c = cell.coefficients;
    return c.alpha * dt + 2 * c.beta * std::sqrt(cell.second_moment) * noise;
}

bool merge_fires(double second_moment, double increment, MergeRule rule) noexcept
{
    switch (rule)
    {
        case MergeRule::MomentHitsZero:
            return second_moment + increment <= 0;
        case MergeRule::AnyDecrease:
            return increment <= 0;
    }
    return false;
}

MergeEvent merge_cluster(SystemState& state, std::span<std::size_t const> members)
{
    std::vector<std::vector<std::size_t>> groups{{members.begin(), members.end()}};
    return merge_clusters(state, groups).front();
}

std::vector<MergeEvent> merge_clusters(SystemState& state,
                                       std::vector<std::vector<std::size_t>> const& groups)
{
    auto& particles = state.particles;
    std::vector<char> removed(particles.size(), 0);
    std::vector<MergeEvent> events;
    std::vector<Particle> created;
    for (auto const& group : groups)
    {
        if (group.empty())
            throw DomainError("merge_cluster: empty member list");
        MergeEvent ev;
        ev.time = state.time;
        Vec2 weighted;
        for (auto i : group)
        {
            if (i >= particles.size())
                throw DomainError("merge_cluster: member index out of range");
            if (removed[i])
                throw DomainError("merge_cluster: particle belongs to two merges");
            removed[i] = 1;
            auto const& p = particles[i];
            ev.parents.push_back(p.id);
            ev.mass += p.mass;
            weighted += p.mass * p.position;
        }
        ev.position = weighted / ev.mass;
        ev.merged_id = state.fresh_id();

        Particle merged;
        merged.id = ev.merged_id;
        merged.mass = ev.mass;
        merged.position = ev.position;
        merged.species = kMergedSpecies;
        created.push_back(merged);
        events.push_back(std::move(ev));
    }

    std::size_t out = 0;
    for (std::size_t i = 0; i < particles.size(); ++i)
    {
        if (!removed[i])
            particles[out++] = particles[i];
    }
    particles.resize(out);
    particles.insert(particles.end(), created.begin(), created.end());
    return events;
}

//---------------------------------------------------------------------------//
// Event log
//---------------------------------------------------------------------------//
void write_events_header(std::ostream& out)
{
    out << "t,parent_ids,merged_id,mass,x,y\n";
}

void write_event(std::ostream& out, MergeEvent const& event)
{
    std::string line = format_double(event.time);
    line += ',';
    for (std::size_t k = 0; k < event.parents.size(); ++k)
    {
        if (k)
            line += ';';
        line += std::to_string(event.parents[k]);
    }
    line += ',';
    line += std::to_string(event.merged_id);
    line += ',';
    line += format_double(event.mass);
    line += ',';
    line += format_double(event.position.x);
    line += ',';
    line += format_double(event.position.y);
    line += '\n';
    out << line;
}

std::vector<MergeEvent> read_events(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open event log", path.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<MergeEvent> events;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (fields.size() != 6)
            throw IoError("malformed event row '" + line + "'", path.string());
        MergeEvent ev;
        ev.time = parse_double(fields[0], "event time");
        std::stringstream ids(fields[1]);
        std::string id;
        while (std::getline(ids, id, ';'))
            ev.parents.push_back(static_cast<ParticleId>(parse_integer(id, "parent id")));
        ev.merged_id = static_cast<ParticleId>(parse_integer(fields[2], "merged id"));
        ev.mass = parse_double(fields[3], "event mass");
        ev.position = {parse_double(fields[4], "event x"), parse_double(fields[5], "event y")};
        events.push_back(std::move(ev));
    }
    return events;
}
}  // namespace coalesce
