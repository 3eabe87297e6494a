#ifndef CHARGE_ITINERARY_HPP
#define CHARGE_ITINERARY_HPP

#include "charge/graph.hpp"

#include <cstdint>
#include <vector>

namespace charge
{

struct Stop
{
    std::size_t position; // index into Itinerary::path
    vertex_id vertex;
    double arrival_soc;
    double depart_soc;
    double duration; // charging time, init time excluded
    double init_time;
};

struct Itinerary
{
    std::vector<vertex_id> path;
    std::vector<std::uint32_t> arcs; // original arc ids, path.size() - 1 entries
    std::vector<Stop> stops;
    double trip_time = 0;
    double drive_time = 0;
    double charge_time = 0;
};

enum class QueryStatus
{
    ok,
    infeasible
};

struct QueryResult
{
    QueryStatus status = QueryStatus::infeasible;
    Itinerary itinerary;
    std::uint64_t labels_settled = 0;
    std::uint64_t dominance_checks = 0;
    double source_bound = 0; // potential-derived lower bound at the source

    bool feasible() const { return status == QueryStatus::ok; }
    double trip_time() const { return feasible() ? itinerary.trip_time : inf; }
};

// Re-simulates an itinerary on the original graph and returns its trip time.
// Throws validation_error if the battery ever runs empty or the record is
// inconsistent with the simulation.
inline double verify_itinerary(const Graph &g, const Itinerary &it, double initial_soc)
{
    const double M = g.capacity();
    const double slack = 1e-9 * std::max(1.0, M);
    if (it.path.empty())
        throw validation_error("empty path");
    if (it.arcs.size() + 1 != it.path.size())
        throw validation_error("path and arc list disagree");
    if (initial_soc < 0 || initial_soc > M)
        throw validation_error("initial SoC outside [0, M]");

    double soc = initial_soc;
    double time = 0;
    std::size_t next_stop = 0;
    for (std::size_t pos = 0; pos < it.path.size(); ++pos)
    {
        while (next_stop < it.stops.size() && it.stops[next_stop].position == pos)
        {
            const auto &stop = it.stops[next_stop++];
            if (stop.vertex != it.path[pos] || !g.is_station(stop.vertex))
                throw validation_error("stop at vertex " + std::to_string(stop.vertex) + " is not a station on the path");
            const auto &cf = g.charging(stop.vertex);
            if (stop.duration < -epsilon)
                throw validation_error("negative charging duration");
            if (std::abs(stop.arrival_soc - soc) > 1e-6 * std::max(1.0, M))
                throw validation_error("recorded arrival SoC disagrees with simulation at vertex " +
                                       std::to_string(stop.vertex));
            soc = cf.charge(soc, std::max(0.0, stop.duration));
            if (std::abs(stop.depart_soc - soc) > 1e-6 * std::max(1.0, M))
                throw validation_error("recorded departure SoC disagrees with simulation at vertex " +
                                       std::to_string(stop.vertex));
            time += cf.init_time() + std::max(0.0, stop.duration);
        }
        if (pos + 1 == it.path.size())
            break;
        const auto arc_id = it.arcs[pos];
        if (arc_id >= g.arc_count())
            throw validation_error("unknown arc id");
        const auto &arc = g.arcs()[arc_id];
        if (arc.tail != it.path[pos] || arc.head != it.path[pos + 1])
            throw validation_error("arc does not connect consecutive path vertices");
        const auto profile = SocProfile::from_consumption(arc.consumption, M);
        if (soc < profile.in_min && soc >= profile.in_min - slack)
            soc = profile.in_min;
        soc = profile.apply(soc);
        if (soc == neg_inf)
            throw validation_error("battery runs empty on arc " + std::to_string(arc.tail) + "->" +
                                   std::to_string(arc.head));
        time += arc.drive_time;
    }
    if (next_stop != it.stops.size())
        throw validation_error("stop positions out of order");
    return time;
}

} // namespace charge

#endif
