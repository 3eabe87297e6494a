#include "charge/generator.hpp"
#include "charge/grid_dp.hpp"
#include "charge/potentials.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace charge;

namespace
{
Graph small_graph(std::uint64_t seed, std::size_t n = 50, std::size_t k = 3)
{
    SmallInstanceConfig cfg;
    cfg.seed = seed;
    cfg.vertices = n;
    cfg.stations = k;
    return generate_small(cfg);
}

// Plain Bellman-Ford over original arcs toward t.
std::vector<double> bellman_ford_to(const Graph &g, vertex_id t, double (*w)(const Arc &, double), double cf)
{
    std::vector<double> d(g.vertex_count(), inf);
    d[t] = 0;
    for (std::size_t round = 0; round < g.vertex_count(); ++round)
        for (const auto &a : g.arcs())
            if (d[a.head] < inf && d[a.head] + w(a, cf) < d[a.tail])
                d[a.tail] = d[a.head] + w(a, cf);
    return d;
}

ConvexBound random_bound(std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<BoundPoint> pts;
    const int k = 1 + static_cast<int>(u(rng) * 5);
    for (int i = 0; i < k; ++i)
        pts.push_back({10 * u(rng), 20 * u(rng)});
    return lower_hull(pts);
}

bool is_convex_decreasing(const ConvexBound &f)
{
    const auto &p = f.points();
    for (std::size_t i = 1; i < p.size(); ++i)
        if (!(p[i].soc > p[i - 1].soc) || !(p[i].time < p[i - 1].time))
            return false;
    for (std::size_t i = 1; i + 1 < p.size(); ++i)
        if (f.slope(i) < f.slope(i - 1) - 1e-9)
            return false;
    return true;
}
} // namespace

TEST(ConvexBound, ExtendAtStation)
{
    const ConvexBound f({{2, 10}, {4, 6}});
    EXPECT_EQ(extend_bound(f, 1), ConvexBound({{0, 10}, {4, 6}}));
    const ConvexBound g({{0, 5}, {3, 1}});
    EXPECT_EQ(extend_bound(g, 0.1), g);
}

TEST(ConvexBound, ExtendIsLowerAndFlatEnough)
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 500; ++i)
    {
        const auto f = random_bound(rng);
        const double ms = 0.1 + std::uniform_real_distribution<double>(0, 3)(rng);
        const auto e = extend_bound(f, ms);
        ASSERT_TRUE(is_convex_decreasing(e));
        for (int k = 0; k <= 200; ++k)
        {
            const double b = 12.0 * k / 200;
            ASSERT_LE(e.eval(b), f.eval(b) + 1e-9);
            // Charging from b to any b' costs at least (b' - b) / ms.
            for (int j = k; j <= 200; j += 17)
            {
                const double b2 = 12.0 * j / 200;
                ASSERT_LE(e.eval(b), (b2 - b) / ms + f.eval(b2) + 1e-9);
            }
        }
        for (std::size_t k = 0; k + 1 < e.size(); ++k)
            ASSERT_GE(e.slope(k), -1.0 / ms - 1e-9);
    }
}

TEST(ConvexBound, MergeIsHullOfMinimum)
{
    std::mt19937_64 rng(2);
    for (int i = 0; i < 500; ++i)
    {
        const auto a = random_bound(rng), b = random_bound(rng);
        const auto m = merge_bounds(a, b);
        ASSERT_TRUE(is_convex_decreasing(m));
        ASSERT_LE(m.size(), a.size() + b.size());
        for (int k = 0; k <= 1000; ++k)
        {
            const double x = 12.0 * k / 1000;
            ASSERT_LE(m.eval(x), std::min(a.eval(x), b.eval(x)) + 1e-9);
        }
        EXPECT_EQ(merge_bounds(a, ConvexBound{}), a);
        EXPECT_EQ(merge_bounds(a, a), a);
    }
}

TEST(ConvexBound, Shift)
{
    const ConvexBound f({{1, 4}, {3, 2}});
    EXPECT_EQ(shift_bound(f, 0, 0), f);
    EXPECT_EQ(shift_bound(ConvexBound::single(0, 0), 3, 10), ConvexBound::single(3, 10));
    EXPECT_EQ(shift_bound(shift_bound(f, 1, 2), 3, 4), shift_bound(f, 4, 6));
}

TEST(ConvexBound, LinkTwoShortcutBounds)
{
    const ConvexBound f1({{1, 3.5}, {1.5, 1.5}, {3.5, 1}});
    const ConvexBound f2({{1, 4}, {3, 2}});
    EXPECT_EQ(link_convex_bounds(f1, f2), ConvexBound({{2, 7.5}, {2.5, 5.5}, {4.5, 3.5}, {6.5, 3}}));
    EXPECT_EQ(link_convex_bounds(f1, ConvexBound::single(0, 0)), f1);
    EXPECT_TRUE(link_convex_bounds(f1, ConvexBound{}).empty());
}

TEST(ConvexBound, LinkMatchesSplitGrid)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 200; ++i)
    {
        const auto a = random_bound(rng), b = random_bound(rng);
        const auto l = link_convex_bounds(a, b);
        ASSERT_TRUE(is_convex_decreasing(l));
        for (int k = 0; k <= 100; ++k)
        {
            const double x = 22.0 * k / 100;
            double best = inf;
            for (int j = 0; j <= 1000; ++j)
            {
                const double split = x * j / 1000;
                best = std::min(best, a.eval(split) + b.eval(x - split));
            }
            // Candidate split points at breakpoints make the grid exact there.
            for (const auto &p : a.points())
                if (p.soc <= x)
                    best = std::min(best, p.time + b.eval(x - p.soc));
            for (const auto &p : b.points())
                if (p.soc <= x)
                    best = std::min(best, a.eval(x - p.soc) + p.time);
            if (best == inf)
            {
                ASSERT_EQ(l.eval(x), inf);
            }
            else
            {
                ASSERT_NEAR(l.eval(x), best, 1e-6);
            }
        }
    }
}

TEST(Omega, TablesMatchBellmanFord)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed)
    {
        const auto g = small_graph(seed);
        const auto bg = BackwardGraph::from_graph(g);
        const vertex_id t = static_cast<vertex_id>(seed % g.vertex_count());
        const auto tables = compute_omega_tables(bg, t);
        const double cf = g.max_charging_slope();
        const auto time = bellman_ford_to(g, t, [](const Arc &a, double) { return a.drive_time; }, cf);
        const auto cons = bellman_ford_to(g, t, [](const Arc &a, double) { return a.consumption; }, cf);
        const auto omega =
            bellman_ford_to(g, t, [](const Arc &a, double c) { return a.drive_time + a.consumption / c; }, cf);
        for (std::size_t v = 0; v < g.vertex_count(); ++v)
        {
            EXPECT_NEAR(tables.time[v], time[v], 1e-9);
            if (cons[v] > g.capacity())
            {
                EXPECT_EQ(tables.consumption[v], inf);
            }
            else
            {
                EXPECT_NEAR(tables.consumption[v], cons[v], 1e-9);
            }
            EXPECT_NEAR(tables.omega[v], omega[v], 1e-9);
            // Minimum of a sum is at least the sum of minima.
            if (tables.omega[v] < inf && tables.consumption[v] < inf)
            {
                EXPECT_GE(tables.omega[v], tables.time[v] + tables.consumption[v] / cf - 1e-9);
            }
        }
    }
}

TEST(Omega, SingleArcAndTarget)
{
    const Graph g(2, {{0, 1, 10, -3}}, {{1, ChargingFunction::make_curve({{0, 0}, {2, 4}}, 0, 5), std::nullopt}}, 5);
    const auto bg = BackwardGraph::from_graph(g);
    const OmegaPotential pot(compute_omega_tables(bg, 1));
    EXPECT_DOUBLE_EQ(pot.tables().time[0], 10);
    EXPECT_DOUBLE_EQ(pot.tables().consumption[0], -3);
    EXPECT_DOUBLE_EQ(pot.tables().omega[0], 10 - 3 / 2.0);
    for (double s : {0.0, 1.0, 5.0})
    {
        EXPECT_EQ(pot.potential(1, s), 0);
        EXPECT_EQ(pot.potential(0, s), 10);
    }
    EXPECT_EQ(pot.potential(0, neg_inf), inf);
}

namespace
{
template <class Pot> void check_consistency(const Graph &g, Pot &&pot, std::mt19937_64 &rng, int draws)
{
    std::uniform_int_distribution<std::size_t> pick_arc(0, g.arc_count() - 1);
    std::uniform_real_distribution<double> soc(0, g.capacity());
    for (int i = 0; i < draws; ++i)
    {
        const auto &a = g.arcs()[pick_arc(rng)];
        const double s = i % 10 == 0 ? 0.0 : (i % 10 == 1 ? g.capacity() : soc(rng));
        const double pu = pot(a.tail, s);
        if (pu == inf)
            continue;
        const double next = SocProfile::from_consumption(a.consumption, g.capacity()).apply(s);
        const double pv = pot(a.head, next);
        ASSERT_GE(a.drive_time - pu + pv, -1e-9) << "arc " << a.tail << "->" << a.head << " soc " << s;
    }
}

template <class Pot> void check_charging_monotone(const Graph &g, Pot &&pot)
{
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
            ASSERT_GE(value, prev - 1e-9) << "station " << st.vertex << " t " << t;
            prev = value;
        }
    }
}
} // namespace

TEST(Omega, ConsistentAndRespectsChargingSpeed)
{
    std::mt19937_64 rng(4);
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        const auto g = small_graph(seed);
        const auto bg = BackwardGraph::from_graph(g);
        const OmegaPotential pot(compute_omega_tables(bg, static_cast<vertex_id>(seed % g.vertex_count())));
        const auto f = [&](vertex_id v, double s) { return pot.potential(v, s); };
        check_consistency(g, f, rng, 5000);
        check_charging_monotone(g, f);
    }
}

TEST(Omega, KeyMatchesGridMinimum)
{
    std::mt19937_64 rng(5);
    const auto g = small_graph(7);
    const auto bg = BackwardGraph::from_graph(g);
    OmegaPotential pot(compute_omega_tables(bg, 0));
    std::uniform_real_distribution<double> u(0, 1);
    int checked = 0;
    for (int i = 0; i < 300; ++i)
    {
        const auto &st = g.stations()[static_cast<std::size_t>(i) % g.stations().size()];
        const auto v = static_cast<vertex_id>(u(rng) * static_cast<double>(g.vertex_count() - 1));
        auto p = SocProfile::identity(g.capacity());
        p = link_profiles(p, SocProfile::from_consumption(g.capacity() * (u(rng) - 0.3), g.capacity()));
        const SocFunction f(10 * u(rng), st.function.max_charge() * u(rng), st.function, p);
        const double key = pot.key(v, f);
        if (f.min_feasible() == inf)
            continue;
        double grid = inf;
        const double lo = f.min_feasible();
        const double hi = lo + st.function.max_time() + 1;
        for (int k = 0; k <= 10000; ++k)
        {
            const double t = lo + (hi - lo) * k / 10000;
            grid = std::min(grid, t + pot.potential(v, f.eval(t)));
        }
        if (grid == inf)
        {
            EXPECT_EQ(key, inf);
            continue;
        }
        EXPECT_LE(key, grid + 1e-6);
        EXPECT_GE(key, grid - 1e-3 * (hi - lo));
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(Pi, ChainWithoutStations)
{
    const Graph g(2, {{0, 1, 5, 2}}, {}, 10);
    const auto bg = BackwardGraph::from_graph(g);
    BoundSearch search(bg, 1);
    search.run();
    EXPECT_EQ(search.bound(1), ConvexBound::single(0, 0));
    EXPECT_EQ(search.bound(0), ConvexBound::single(2, 5));
}

TEST(Pi, BoundsNeverExceedOptimum)
{
    for (std::uint64_t seed = 1; seed <= 15; ++seed)
    {
        const auto g = small_graph(seed, 30, 1 + seed % 3);
        const auto bg = BackwardGraph::from_graph(g);
        const vertex_id t = static_cast<vertex_id>((seed * 7) % g.vertex_count());
        BoundSearch search(bg, t);
        search.run();
        for (vertex_id v = 0; v < g.vertex_count(); ++v)
            for (int k = 0; k <= 8; ++k)
            {
                const double b = g.capacity() * k / 8;
                const auto exact = cfp_query(g, v, t, b);
                const double bound = search.bound(v).eval(b);
                if (exact.feasible())
                {
                    ASSERT_LE(bound, exact.trip_time() + 1e-9) << "v " << v << " b " << b;
                    const auto grid = grid_dp_query(g, v, t, b, g.capacity() / 100);
                    ASSERT_LE(bound, grid.trip_time + 1e-9);
                }
            }
    }
}

TEST(Pi, CompleteAndSuspendedConsistency)
{
    std::mt19937_64 rng(6);
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        const auto g = small_graph(seed);
        const auto bg = BackwardGraph::from_graph(g);
        const vertex_id t = static_cast<vertex_id>((seed * 3) % g.vertex_count());
        BoundSearch full(bg, t);
        full.run();
        const auto f = [&](vertex_id v, double s) { return full.bound(v).eval(s); };
        SCOPED_TRACE("seed " + std::to_string(seed));
        check_consistency(g, f, rng, 3000);
        check_charging_monotone(g, f);
        for (double s : {0.0, 1.0, g.capacity()})
            EXPECT_EQ(f(t, s), 0);

        BoundSearch partial(bg, t, true);
        const int stops = static_cast<int>(rng() % 40);
        for (int i = 0; i < stops; ++i)
            partial.step();
        const auto star = [&](vertex_id v, double s) { return partial.potential_bound(v).eval(s); };
        SCOPED_TRACE("suspended after " + std::to_string(stops));
        check_consistency(g, star, rng, 3000);
        check_charging_monotone(g, star);
    }
}

TEST(Pi, SuspendedStarBoundEdgeCases)
{
    const auto g = small_graph(3);
    const auto bg = BackwardGraph::from_graph(g);
    BoundSearch drained(bg, 0, true);
    drained.run();
    EXPECT_EQ(drained.min_key(), inf);
    for (vertex_id v = 0; v < g.vertex_count(); ++v)
        EXPECT_EQ(drained.potential_bound(v), drained.bound(v));

    BoundSearch fresh(bg, 0, true);
    fresh.step();
    const double t_star = fresh.min_key();
    ASSERT_LT(t_star, inf);
    for (vertex_id v = 0; v < g.vertex_count(); ++v)
    {
        if (!fresh.bound(v).empty())
            continue;
        for (double s : {0.0, 10.0, g.capacity()})
            EXPECT_EQ(fresh.potential_bound(v).eval(s), t_star);
    }
}

TEST(Pi, OnDemandQueueKeysNondecreasing)
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        const auto g = small_graph(seed);
        const auto bg = BackwardGraph::from_graph(g);
        BoundSearch search(bg, static_cast<vertex_id>(seed % g.vertex_count()), true);
        double last = neg_inf;
        while (true)
        {
            const double k = search.min_key();
            if (k == inf)
                break;
            ASSERT_GE(k, last - 1e-9);
            last = k;
            search.step();
        }
    }
}

TEST(Pi, BoundKeyMatchesGridMinimum)
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 300; ++i)
    {
        const auto cf = fixtures::random_curve(rng, 10, 1 + i % 4, 0);
        auto p = link_profiles(SocProfile::identity(10), SocProfile::from_consumption(10 * (u(rng) - 0.3), 10));
        const SocFunction f(5 * u(rng), cf.max_charge() * u(rng), cf, p);
        const auto bound = random_bound(rng);
        const double key = bound_key(bound, f);
        if (f.min_feasible() == inf)
        {
            EXPECT_EQ(key, inf);
            continue;
        }
        const auto value = [&](double t) { return t + bound.eval(f.eval(t)); };
        double grid = inf;
        double lo = f.min_feasible();
        double hi = lo + cf.max_time() + 1;
        for (int round = 0; round < 3; ++round)
        {
            const double step = (hi - lo) / 20000;
            double best_t = lo;
            for (int k = 0; k <= 20000; ++k)
            {
                const double t = lo + step * k;
                if (value(t) < grid)
                {
                    grid = value(t);
                    best_t = t;
                }
            }
            lo = std::max(f.min_feasible(), best_t - step);
            hi = best_t + step;
        }
        if (grid < inf)
        {
            EXPECT_LE(key, grid + 1e-9);
            EXPECT_GE(key, grid - 1e-3);
        }
    }
}
