#ifndef CHARGE_GRID_DP_HPP
#define CHARGE_GRID_DP_HPP

#include "charge/cfp.hpp"
#include "charge/graph.hpp"

#include <cmath>
#include <queue>
#include <vector>

namespace charge
{

// Exact bicriteria (time, SoC) search without charging. Visits every
// Pareto-optimal label once, in nondecreasing time order; the visitor may
// return false to stop early.
template <class Visit> void pareto_sweep(const Graph &g, vertex_id from, double soc, Visit &&visit)
{
    struct Item
    {
        double time;
        double soc;
        vertex_id vertex;
        bool operator>(const Item &o) const
        {
            if (time != o.time)
                return time > o.time;
            if (soc != o.soc)
                return soc < o.soc;
            return vertex > o.vertex;
        }
    };
    std::vector<double> best(g.vertex_count(), neg_inf);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.push({0, soc, from});
    while (!heap.empty())
    {
        const auto it = heap.top();
        heap.pop();
        if (it.soc <= best[it.vertex])
            continue;
        best[it.vertex] = it.soc;
        if (!visit(it.vertex, it.time, it.soc))
            return;
        for (const auto &a : g.out_arcs(it.vertex))
        {
            const double next = a.profile.apply(it.soc);
            if (next != neg_inf && next > best[a.head])
                heap.push({it.time + a.drive_time, next, a.head});
        }
    }
}

// Shortest feasible drive time with no charging at all.
inline double bsp_reference(const Graph &g, vertex_id s, vertex_id t, double soc)
{
    double result = inf;
    pareto_sweep(g, s, soc, [&](vertex_id v, double time, double) {
        if (v == t)
        {
            result = time;
            return false;
        }
        return true;
    });
    return result;
}

class grid_limit_error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct GridDpResult
{
    bool feasible = false;
    double trip_time = inf;
    std::size_t states = 0;
};

// Dynamic program over (station, departure SoC on a grid of step delta).
// Arrival SoCs are floored to the grid, departures are grid levels up to the
// station's maximum plus the maximum itself. Every policy it evaluates is
// realizable, so the result never undercuts the true optimum.
inline GridDpResult grid_dp_query(const Graph &g, vertex_id s, vertex_id t, double initial_soc, double delta,
                                  std::size_t state_cap = 4'000'000)
{
    if (!(delta > 0))
        throw validation_error("grid step must be positive");
    const double M = g.capacity();
    const auto levels = static_cast<std::size_t>(std::floor(M / delta + 1e-9)) + 1;
    const std::size_t per_station = levels + 1; // last slot: exact maximum charge
    const std::size_t k = g.stations().size();
    if (k * per_station > state_cap)
        throw grid_limit_error("grid state space exceeds cap");

    GridDpResult result;
    if (s == t)
    {
        result.feasible = true;
        result.trip_time = 0;
        return result;
    }

    std::vector<double> dist(k * per_station, inf);
    using entry = std::pair<double, std::size_t>;
    std::priority_queue<entry, std::vector<entry>, std::greater<>> heap;

    const auto level_soc = [&](std::size_t station, std::size_t slot) {
        if (slot == levels)
            return g.stations()[station].function.max_charge();
        return std::min(M, static_cast<double>(slot) * delta);
    };

    const auto expand = [&](vertex_id from, double soc, double start, int skip_station) {
        pareto_sweep(g, from, soc, [&](vertex_id v, double time, double arrival) {
            const double now = start + time;
            if (now >= result.trip_time)
                return false;
            if (v == t)
            {
                result.trip_time = now;
                result.feasible = true;
                return false;
            }
            const int idx = g.station_index(v);
            if (idx < 0 || idx == skip_station)
                return true;
            const auto &cf = g.stations()[static_cast<std::size_t>(idx)].function;
            const auto base = static_cast<std::size_t>(idx) * per_station;
            const double top = cf.max_charge();
            const double floored = std::floor(arrival / delta + 1e-9) * delta;
            const double from_soc = std::min(arrival, floored);
            const auto push = [&](std::size_t slot, double depart) {
                const double d = cf.is_swap() ? 0.0 : cf.duration(from_soc, depart);
                if (d == inf)
                    return;
                const double arrive = now + cf.init_time() + d;
                if (arrive < dist[base + slot])
                {
                    dist[base + slot] = arrive;
                    heap.push({arrive, base + slot});
                }
            };
            if (cf.is_swap())
            {
                push(levels, M);
                return true;
            }
            const auto first = static_cast<std::size_t>(std::floor(from_soc / delta + 1e-9)) + 1;
            for (std::size_t slot = first; slot < levels && static_cast<double>(slot) * delta < top; ++slot)
                push(slot, static_cast<double>(slot) * delta);
            if (top > from_soc)
                push(levels, top);
            return true;
        });
    };

    expand(s, initial_soc, 0, -1);
    while (!heap.empty())
    {
        const auto [d, state] = heap.top();
        heap.pop();
        if (d > dist[state] || d >= result.trip_time)
            continue;
        ++result.states;
        const auto station = state / per_station;
        const auto slot = state % per_station;
        expand(g.stations()[station].vertex, level_soc(station, slot), d, static_cast<int>(station));
    }
    return result;
}

inline double min_charging_slope(const Graph &g)
{
    double r = inf;
    for (const auto &s : g.stations())
        if (!s.function.is_swap())
            r = std::min(r, s.function.min_segment_slope());
    return r;
}

// Allowed gap between the grid result and the exact optimum.
inline double grid_tolerance(const Graph &g, std::size_t stops, double delta)
{
    const double slope = min_charging_slope(g);
    if (slope == inf)
        return 1e-9;
    return static_cast<double>(stops + 1) * delta / slope + 1e-9;
}

struct ValidationIssue
{
    std::size_t query;
    std::string message;
};

struct ValidationReport
{
    std::size_t queries = 0;
    std::size_t feasible = 0;
    double max_gap = 0;
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
};

struct GridQuery
{
    vertex_id source;
    vertex_id target;
    double soc;
};

// Compares the exact search with the grid program on every query.
inline ValidationReport validate_instance(const Graph &g, const std::vector<GridQuery> &queries, double delta)
{
    ValidationReport report;
    const bool fine_grid = delta <= 0.01 * g.capacity() + 1e-12;
    for (std::size_t i = 0; i < queries.size(); ++i)
    {
        const auto &q = queries[i];
        ++report.queries;
        const auto exact = cfp_query(g, q.source, q.target, q.soc);
        const auto grid = grid_dp_query(g, q.source, q.target, q.soc, delta);
        const auto fail = [&](const std::string &m) { report.issues.push_back({i, m}); };
        if (exact.feasible())
        {
            ++report.feasible;
            try
            {
                const double sim = verify_itinerary(g, exact.itinerary, q.soc);
                if (std::abs(sim - exact.trip_time()) > 1e-9 * std::max(1.0, sim))
                    fail("itinerary re-simulation gives a different trip time");
            }
            catch (const validation_error &e)
            {
                fail(std::string("itinerary check failed: ") + e.what());
            }
        }
        if (exact.trip_time() > grid.trip_time + 1e-9)
            fail("exact search slower than grid program");
        if (grid.feasible && exact.feasible())
        {
            const double gap = grid.trip_time - exact.trip_time();
            report.max_gap = std::max(report.max_gap, gap);
            const double tol = grid_tolerance(g, exact.itinerary.stops.size(), delta);
            if (gap > tol)
                fail("grid gap " + std::to_string(gap) + " exceeds tolerance " + std::to_string(tol));
        }
        if (fine_grid && grid.feasible != exact.feasible())
            fail("feasibility disagrees");
    }
    return report;
}

} // namespace charge

#endif
