#ifndef CHARGE_TEST_PROPERTIES_HPP
#define CHARGE_TEST_PROPERTIES_HPP

#include "charge/cfp.hpp"
#include "fixtures.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <vector>

namespace charge::properties
{

// A label that last charged at u, now at station v, and one charging time
// theta at u.
struct SpawnCase
{
    double capacity;
    ChargingFunction at_u;
    ChargingFunction at_v;
    double trip;
    double soc;
    SocProfile profile;
    double theta;
};

inline ChargingFunction random_station(std::mt19937_64 &rng, double M)
{
    std::uniform_real_distribution<double> u(0, 1);
    const double init = u(rng) < 0.5 ? 0.0 : 3 * u(rng);
    if (u(rng) < 0.1)
        return ChargingFunction::make_swap(M, init + 0.5);
    return fixtures::random_curve(rng, M, 1 + static_cast<int>(rng() % 4), init);
}

inline std::optional<SpawnCase> draw_spawn_case(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> u(0, 1);
    SpawnCase c{10 + 90 * u(rng), {}, {}, 0, 0, {}, 0};
    const double M = c.capacity;
    c.at_u = random_station(rng, M);
    c.at_v = random_station(rng, M);
    c.trip = 50 * u(rng);
    c.soc = u(rng) < 0.2 ? 0.0 : M * u(rng);
    c.profile = SocProfile::identity(M);
    const int arcs = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < arcs; ++i)
        c.profile = link_profiles(c.profile, SocProfile::from_consumption(M * (0.9 * u(rng) - 0.3), M));
    const SocFunction f(c.trip, c.soc, c.at_u, c.profile);
    const double start = f.min_feasible();
    if (start == inf)
        return std::nullopt;
    const double span = c.at_u.max_time() + c.at_u.init_time() + 1;
    c.theta = start - c.trip + (u(rng) < 0.1 ? 0.0 : 1.2 * span * u(rng));
    const auto bps = f.breakpoints();
    if (u(rng) < 0.2 && !bps.empty())
        c.theta = bps[rng() % bps.size()].time - c.trip;
    return c;
}

// Largest amount by which the theta-label exceeds the upper envelope of the
// original label and its spawned labels, over a dense time sample.
inline double spawn_deficit(const SpawnCase &c)
{
    const SocFunction f(c.trip, c.soc, c.at_u, c.profile);
    const double depart = c.trip + c.theta;
    const SocFunction target(depart + c.at_v.init_time(), f.eval(depart), c.at_v, SocProfile::identity(c.capacity));
    std::vector<SocFunction> family{f};
    const auto points = spawn_points(f, c.at_v);
    for (const auto &p : points)
        family.emplace_back(p.trip, p.soc, c.at_v, SocProfile::identity(c.capacity));

    std::vector<double> times;
    const double end =
        std::max(depart + c.at_v.init_time() + c.at_v.max_time(), f.breakpoints().back().time) + 1;
    for (int k = 0; k <= 600; ++k)
        times.push_back(c.trip + (end - c.trip) * k / 600.0);
    for (const auto &h : family)
        for (const auto &p : h.breakpoints())
            times.push_back(p.time);
    for (const auto &p : target.breakpoints())
        times.push_back(p.time);

    double worst = 0;
    for (double t : times)
    {
        const double want = target.eval(t);
        if (want == neg_inf)
            continue;
        double have = neg_inf;
        for (const auto &h : family)
            have = std::max(have, h.eval(t));
        worst = std::max(worst, want - have);
    }
    return worst;
}

// Smallest reduced cost drive + pot(head, next) - pot(tail, soc) over sampled
// arcs and SoC values.
template <class Pot> double min_reduced_cost(const Graph &g, Pot &&pot, std::mt19937_64 &rng, int draws)
{
    std::uniform_int_distribution<std::size_t> pick_arc(0, g.arc_count() - 1);
    std::uniform_real_distribution<double> soc(0, g.capacity());
    double worst = inf;
    for (int i = 0; i < draws; ++i)
    {
        const auto &a = g.arcs()[pick_arc(rng)];
        const double s = i % 10 == 0 ? 0.0 : (i % 10 == 1 ? g.capacity() : soc(rng));
        const double pu = pot(a.tail, s);
        if (pu == inf)
            continue;
        const double next = SocProfile::from_consumption(a.consumption, g.capacity()).apply(s);
        worst = std::min(worst, a.drive_time - pu + pot(a.head, next));
    }
    return worst;
}

// Largest drop of t + pot(v, curve(t)) along sampled charging times.
template <class Pot> double max_charging_drop(const Graph &g, Pot &&pot)
{
    double worst = 0;
    for (const auto &st : g.stations())
    {
        const auto &cf = st.function;
        if (cf.is_swap())
            continue;
        double prev = neg_inf;
        for (int k = 0; k <= 400; ++k)
        {
            const double t = cf.max_time() * 1.1 * k / 400;
            const double value = t + pot(st.vertex, cf.curve_at(t));
            if (value == inf)
                continue;
            worst = std::max(worst, prev - value);
            prev = value;
        }
    }
    return worst;
}

} // namespace charge::properties

#endif
