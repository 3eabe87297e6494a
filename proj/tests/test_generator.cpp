#include "charge/generator.hpp"

#include <gtest/gtest.h>

#include <functional>

using namespace charge;

namespace
{
double negative_share(const Graph &g)
{
    std::size_t neg = 0;
    for (const auto &a : g.arcs())
        neg += a.consumption < 0;
    return static_cast<double>(neg) / static_cast<double>(g.arc_count());
}

// Smallest total consumption over all simple cycles, by exhaustive search.
double min_cycle_consumption(const Graph &g)
{
    double best = inf;
    std::vector<char> on_path(g.vertex_count(), 0);
    std::function<void(vertex_id, vertex_id, double)> walk = [&](vertex_id start, vertex_id v, double sum) {
        for (const auto &a : g.out_arcs(v))
        {
            if (a.head == start)
                best = std::min(best, sum + a.consumption);
            else if (a.head > start && !on_path[a.head])
            {
                on_path[a.head] = 1;
                walk(start, a.head, sum + a.consumption);
                on_path[a.head] = 0;
            }
        }
    };
    for (vertex_id s = 0; s < g.vertex_count(); ++s)
    {
        on_path[s] = 1;
        walk(s, s, 0);
        on_path[s] = 0;
    }
    return best;
}
} // namespace

TEST(Generator, TwoVertexInstance)
{
    GeneratorConfig cfg;
    cfg.vertices = 2;
    const auto g = generate_synthetic(cfg);
    EXPECT_EQ(g.vertex_count(), 2u);
    EXPECT_GE(g.arc_count(), 1u);
    for (const auto &a : g.arcs())
        EXPECT_NE(a.tail, a.head);
    EXPECT_THROW(generate_synthetic(GeneratorConfig{.vertices = 1}), validation_error);
}

TEST(Generator, NegativeArcShareAtDefaults)
{
    const auto g = generate_synthetic(GeneratorConfig{});
    EXPECT_EQ(g.vertex_count(), 10000u);
    const double share = negative_share(g);
    EXPECT_GE(share, 0.05);
    EXPECT_LE(share, 0.15);
}

TEST(Generator, AverageDegreeNearTarget)
{
    for (double deg : {2.5, 4.0, 6.0})
    {
        GeneratorConfig cfg;
        cfg.vertices = 2500;
        cfg.average_degree = deg;
        const auto g = generate_synthetic(cfg);
        const double got = static_cast<double>(g.arc_count()) / static_cast<double>(g.vertex_count());
        EXPECT_NEAR(got, deg, 0.25 * deg) << "target " << deg;
    }
}

TEST(Generator, NoNegativeCycles)
{
    for (std::uint64_t seed = 1; seed <= 30; ++seed)
    {
        GeneratorConfig cfg;
        cfg.vertices = 4 + seed % 9;
        cfg.average_degree = 2.5 + static_cast<double>(seed % 4);
        cfg.roughness = 3;
        cfg.seed = seed;
        const auto g = generate_synthetic(cfg);
        EXPECT_GE(min_cycle_consumption(g), 0) << "seed " << seed;

        SmallInstanceConfig small;
        small.vertices = 4 + seed % 9;
        small.seed = seed;
        EXPECT_GE(min_cycle_consumption(generate_small(small)), 0) << "seed " << seed;
    }
}

TEST(Generator, DeterministicPerSeed)
{
    GeneratorConfig cfg;
    cfg.vertices = 900;
    const auto a = generate_synthetic(cfg);
    const auto b = generate_synthetic(cfg);
    EXPECT_EQ(render_instance(a), render_instance(b));
    cfg.seed = 2;
    EXPECT_NE(render_instance(a), render_instance(generate_synthetic(cfg)));
}

TEST(Generator, StationShareAndScenario)
{
    GeneratorConfig cfg;
    cfg.vertices = 3000;
    cfg.station_fraction = 0.02;
    cfg.scenario = Scenario::bss;
    const auto g = generate_synthetic(cfg);
    EXPECT_EQ(g.stations().size(), 60u);
    for (const auto &s : g.stations())
        EXPECT_EQ(s.type, StationType::swap);
}

TEST(RankQueries, RankOneIsFirstExtraction)
{
    GeneratorConfig cfg;
    cfg.vertices = 400;
    const auto g = generate_synthetic(cfg);
    const auto qs = generate_rank_queries(g, 5, 64, 10, 100);
    ASSERT_EQ(qs.size(), 7u * 10u);
    for (const auto &rq : qs)
    {
        const auto order = dijkstra_order(g, rq.query.source, rq.rank + 1);
        ASSERT_GT(order.size(), rq.rank);
        EXPECT_EQ(order[rq.rank], rq.query.target);
        if (rq.rank == 1)
        {
            // First extraction after the source: the nearest out-neighbour.
            double nearest = inf;
            for (const auto &a : g.out_arcs(rq.query.source))
                nearest = std::min(nearest, a.drive_time);
            bool is_nearest = false;
            for (const auto &a : g.out_arcs(rq.query.source))
                is_nearest |= a.head == rq.query.target && a.drive_time == nearest;
            EXPECT_TRUE(is_nearest);
        }
    }
}

TEST(RankQueries, SameSeedSameQueries)
{
    GeneratorConfig cfg;
    cfg.vertices = 400;
    const auto g = generate_synthetic(cfg);
    const auto a = generate_rank_queries(g, 9, 128, 5, 50);
    const auto b = generate_rank_queries(g, 9, 128, 5, 50);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        EXPECT_EQ(a[i].rank, b[i].rank);
        EXPECT_EQ(a[i].query, b[i].query);
    }
}

TEST(RankQueries, RankBeyondGraphIsAnError)
{
    GeneratorConfig cfg;
    cfg.vertices = 16;
    const auto g = generate_synthetic(cfg);
    EXPECT_THROW(generate_rank_queries(g, 1, 64, 1, 10), validation_error);
}
