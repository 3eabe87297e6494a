#ifndef CHARGE_GENERATOR_HPP
#define CHARGE_GENERATOR_HPP

#include "charge/instance_io.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <random>
#include <vector>

namespace charge
{

struct GeneratorConfig
{
    std::size_t vertices = 10000;
    double average_degree = 2.5; // arcs per vertex; road networks sit near 2.3
    double station_fraction = 0.01;
    double roughness = 1.0; // scales the elevation field
    double capacity = 16000; // Wh
    double spacing = 1000;   // metres between grid neighbours
    Scenario scenario = Scenario::realistic;
    std::uint64_t seed = 1;
};

namespace detail
{
inline double to_micro(double x) { return std::round(x * 1e6) / 1e6; }
} // namespace detail

// Jittered grid. Below degree 4 a random spanning tree of the grid plus
// random extra grid edges is kept; above it diagonals are added. Consumption is a difference of a
// vertex energy potential plus a positive rolling term, so every cycle has
// positive total consumption. All values are exact at six decimals.
inline Graph generate_synthetic(const GeneratorConfig &cfg)
{
    if (cfg.vertices < 2)
        throw validation_error("generator needs at least two vertices");
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = cfg.vertices;
    const auto side = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));

    std::vector<double> x(n), y(n);
    for (std::size_t v = 0; v < n; ++v)
    {
        x[v] = (static_cast<double>(v % side) + 0.6 * (unit(rng) - 0.5)) * cfg.spacing;
        y[v] = (static_cast<double>(v / side) + 0.6 * (unit(rng) - 0.5)) * cfg.spacing;
    }

    // Smooth elevation field (metres) from a few random waves.
    struct Wave
    {
        double kx, ky, phase, amplitude;
    };
    std::vector<Wave> waves;
    const double extent = static_cast<double>(side) * cfg.spacing;
    for (int i = 0; i < 8; ++i)
    {
        const double wavelength = extent / (1.0 + 6.0 * unit(rng)) + 4 * cfg.spacing;
        const double angle = 2 * M_PI * unit(rng);
        waves.push_back({2 * M_PI * std::cos(angle) / wavelength, 2 * M_PI * std::sin(angle) / wavelength,
                         2 * M_PI * unit(rng), 0.5 + unit(rng)});
    }
    std::vector<double> height(n, 0.0);
    for (std::size_t v = 0; v < n; ++v)
        for (const auto &w : waves)
            height[v] += w.amplitude * std::sin(w.kx * x[v] + w.ky * y[v] + w.phase);
    // Normalise so the RMS height difference between grid neighbours is
    // roughness * 18 m, independent of the random wave mix.
    double sum = 0;
    std::size_t pairs = 0;
    for (std::size_t v = 0; v + 1 < n; ++v)
        if ((v + 1) % side != 0)
        {
            sum += (height[v + 1] - height[v]) * (height[v + 1] - height[v]);
            ++pairs;
        }
    const double rms = pairs > 0 ? std::sqrt(sum / static_cast<double>(pairs)) : 0.0;
    const double scale = rms > 0 ? 18.0 * cfg.roughness * cfg.spacing / 1000.0 / rms : 0.0;
    // Vehicle mass 1800 kg: potential energy in micro-Wh per metre of height.
    const double micro_wh_per_metre = 1800.0 * 9.81 / 3600.0 * 1e6;
    std::vector<long long> energy(n);
    for (std::size_t v = 0; v < n; ++v)
        energy[v] = std::llround(height[v] * scale * micro_wh_per_metre);

    const double diagonal_share = std::clamp((cfg.average_degree - 4.0) / 4.0, 0.0, 1.0);
    const std::array<double, 4> speeds{50, 80, 100, 130}; // km/h
    const std::array<double, 4> weights{0.4, 0.3, 0.2, 0.1};
    std::discrete_distribution<int> road_class(weights.begin(), weights.end());

    std::vector<Arc> arcs;
    const auto connect = [&](std::size_t u, std::size_t v) {
        const double length = std::hypot(x[u] - x[v], y[u] - y[v]);
        const double speed = speeds[static_cast<std::size_t>(road_class(rng))] / 3.6;
        const double drive = std::max(1e-3, detail::to_micro(length / speed));
        // Rolling and drag, Wh per metre, grows with speed.
        const double rolling = (0.09 + 0.0008 * speed * speed / 10.0) * length;
        for (auto [a, b] : {std::pair{u, v}, std::pair{v, u}})
        {
            const long long micro = energy[b] - energy[a] + std::llround(rolling * 1e6) + 1;
            double c = static_cast<double>(micro) / 1e6;
            c = std::clamp(c, -cfg.capacity, cfg.capacity);
            arcs.push_back({static_cast<vertex_id>(a), static_cast<vertex_id>(b), drive, c});
        }
    };
    std::vector<std::pair<std::size_t, std::size_t>> grid;
    for (std::size_t v = 0; v < n; ++v)
    {
        if (v % side + 1 < side && v + 1 < n)
            grid.push_back({v, v + 1});
        if (v + side < n)
            grid.push_back({v, v + side});
    }
    std::vector<char> keep(grid.size(), 1);
    if (cfg.average_degree < 4.0)
    {
        std::vector<std::size_t> order(grid.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::size_t> parent(n);
        std::iota(parent.begin(), parent.end(), std::size_t{0});
        const auto find = [&](std::size_t a) {
            while (parent[a] != a)
                a = parent[a] = parent[parent[a]];
            return a;
        };
        std::vector<std::size_t> spare;
        for (auto i : order)
        {
            const auto a = find(grid[i].first);
            const auto b = find(grid[i].second);
            if (a != b)
                parent[a] = b;
            else
                spare.push_back(i);
        }
        const double wanted = cfg.average_degree * static_cast<double>(n) / 2.0 - static_cast<double>(n - 1);
        const double share =
            spare.empty() ? 0.0 : std::clamp(wanted / static_cast<double>(spare.size()), 0.0, 1.0);
        for (auto i : spare)
            keep[i] = unit(rng) < share;
    }
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (keep[i])
            connect(grid[i].first, grid[i].second);
    for (std::size_t v = 0; v < n; ++v)
    {
        const std::size_t col = v % side;
        if (col + 1 < side && v + side + 1 < n && unit(rng) < diagonal_share)
            connect(v, v + side + 1);
        if (col > 0 && v + side - 1 < n && unit(rng) < diagonal_share)
            connect(v, v + side - 1);
    }

    std::size_t k = static_cast<std::size_t>(std::llround(cfg.station_fraction * static_cast<double>(n)));
    k = std::clamp<std::size_t>(k, cfg.station_fraction > 0 ? 1 : 0, n);
    std::vector<vertex_id> order(n);
    for (std::size_t v = 0; v < n; ++v)
        order[v] = static_cast<vertex_id>(v);
    for (std::size_t i = 0; i < k; ++i)
        std::swap(order[i], order[std::uniform_int_distribution<std::size_t>(i, n - 1)(rng)]);
    std::vector<Station> stations;
    for (std::size_t i = 0; i < k; ++i)
        stations.push_back({order[i], ChargingFunction::make_swap(cfg.capacity, 180), std::nullopt});
    stations = assign_scenario(std::move(stations), cfg.scenario, cfg.seed ^ 0x5ca1ab1eULL, cfg.capacity);
    return Graph(n, std::move(arcs), std::move(stations), cfg.capacity);
}

struct SmallInstanceConfig
{
    std::size_t vertices = 30;
    std::size_t stations = 3;
    double capacity = 100;
    double extra_arc_share = 1.0; // random arcs per vertex beyond a spanning path
    std::uint64_t seed = 1;
};

// Random concave charging curve with integer-friendly breakpoints.
inline ChargingFunction random_concave_curve(std::mt19937_64 &rng, double capacity)
{
    std::uniform_int_distribution<int> segs(1, 4);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int s = segs(rng);
    // Distinct slopes on a 0.25 grid and cuts on a top/8 grid keep the
    // curve safely concave after rounding to six decimals.
    std::vector<int> slope_steps;
    while (static_cast<int>(slope_steps.size()) < s)
    {
        const int step = std::uniform_int_distribution<int>(2, 20)(rng);
        if (std::find(slope_steps.begin(), slope_steps.end(), step) == slope_steps.end())
            slope_steps.push_back(step);
    }
    std::sort(slope_steps.rbegin(), slope_steps.rend());
    const double top = detail::to_micro(capacity * (0.7 + 0.3 * unit(rng)));
    std::vector<int> cut_steps{0, 8};
    while (static_cast<int>(cut_steps.size()) < s + 1)
    {
        const int c = std::uniform_int_distribution<int>(1, 7)(rng);
        if (std::find(cut_steps.begin(), cut_steps.end(), c) == cut_steps.end())
            cut_steps.push_back(c);
    }
    std::sort(cut_steps.begin(), cut_steps.end());
    std::vector<CurvePoint> pts{{0, 0}};
    double t = 0;
    for (std::size_t i = 1; i < cut_steps.size(); ++i)
    {
        const double lo = detail::to_micro(top * cut_steps[i - 1] / 8.0);
        const double hi = i + 1 == cut_steps.size() ? top : detail::to_micro(top * cut_steps[i] / 8.0);
        t = detail::to_micro(t + (hi - lo) / (0.25 * slope_steps[i - 1]));
        pts.push_back({t, hi});
    }
    const double init = unit(rng) < 0.5 ? 0 : detail::to_micro(3 * unit(rng));
    return ChargingFunction::make_curve(pts, init, capacity);
}

// Small dense-ish instance for oracle comparisons: a random spanning path
// plus random arcs, energies from a vertex potential so no cycle is negative.
inline Graph generate_small(const SmallInstanceConfig &cfg)
{
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = std::max<std::size_t>(cfg.vertices, 2);
    const double M = cfg.capacity;
    std::vector<double> energy(n);
    for (auto &e : energy)
        e = detail::to_micro(0.3 * M * unit(rng));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i)
        perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Arc> arcs;
    const auto add = [&](std::size_t a, std::size_t b) {
        if (a == b)
            return;
        const double drive = detail::to_micro(1 + 9 * unit(rng));
        const double rolling = detail::to_micro(0.02 * M + 0.15 * M * unit(rng));
        const double c = std::clamp(detail::to_micro(energy[b] - energy[a] + rolling), -M, M);
        arcs.push_back({static_cast<vertex_id>(a), static_cast<vertex_id>(b), drive, c});
    };
    for (std::size_t i = 0; i + 1 < n; ++i)
    {
        add(perm[i], perm[i + 1]);
        add(perm[i + 1], perm[i]);
    }
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const auto extra = static_cast<std::size_t>(cfg.extra_arc_share * static_cast<double>(n));
    for (std::size_t i = 0; i < extra; ++i)
        add(pick(rng), pick(rng));
    std::vector<Station> stations;
    for (std::size_t i = 0; i < std::min(cfg.stations, n); ++i)
        stations.push_back({static_cast<vertex_id>(perm[(i * 7 + 3) % n]), {}, std::nullopt});
    std::sort(stations.begin(), stations.end(), [](auto &a, auto &b) { return a.vertex < b.vertex; });
    stations.erase(std::unique(stations.begin(), stations.end(),
                               [](auto &a, auto &b) { return a.vertex == b.vertex; }),
                   stations.end());
    for (auto &s : stations)
        s.function = unit(rng) < 0.15 ? ChargingFunction::make_swap(M, detail::to_micro(1 + 5 * unit(rng)))
                                      : random_concave_curve(rng, M);
    return Graph(n, std::move(arcs), std::move(stations), M);
}

// Dijkstra on drive time from s; returns vertices in extraction order, s first.
inline std::vector<vertex_id> dijkstra_order(const Graph &g, vertex_id s, std::size_t limit)
{
    std::vector<double> dist(g.vertex_count(), inf);
    std::vector<char> done(g.vertex_count(), 0);
    using item = std::pair<double, vertex_id>;
    std::priority_queue<item, std::vector<item>, std::greater<>> heap;
    std::vector<vertex_id> order;
    dist[s] = 0;
    heap.push({0, s});
    while (!heap.empty() && order.size() < limit)
    {
        const auto [d, v] = heap.top();
        heap.pop();
        if (done[v])
            continue;
        done[v] = 1;
        order.push_back(v);
        for (const auto &a : g.out_arcs(v))
            if (d + a.drive_time < dist[a.head])
            {
                dist[a.head] = d + a.drive_time;
                heap.push({dist[a.head], a.head});
            }
    }
    return order;
}

struct RankQuery
{
    std::size_t rank;
    Query query;
};

// For every rank 2^k <= max_rank, `per_rank` queries whose target is the
// 2^k-th vertex settled after the source.
inline std::vector<RankQuery> generate_rank_queries(const Graph &g, std::uint64_t seed, std::size_t max_rank,
                                                    std::size_t per_rank, double soc)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<vertex_id> pick(0, static_cast<vertex_id>(g.vertex_count() - 1));
    std::vector<RankQuery> out;
    for (std::size_t rank = 1; rank <= max_rank; rank *= 2)
    {
        std::size_t made = 0, attempts = 0;
        while (made < per_rank)
        {
            if (++attempts > 50 * per_rank + 100)
                throw validation_error("rank " + std::to_string(rank) + " exceeds reachable set sizes");
            const auto s = pick(rng);
            const auto order = dijkstra_order(g, s, rank + 1);
            if (order.size() <= rank)
                continue;
            out.push_back({rank, {s, order[rank], soc}});
            ++made;
        }
    }
    return out;
}

inline std::vector<Query> random_queries(const Graph &g, std::uint64_t seed, std::size_t count, double soc_share_min,
                                         double soc_share_max)
{
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<vertex_id> pick(0, static_cast<vertex_id>(g.vertex_count() - 1));
    std::uniform_real_distribution<double> share(soc_share_min, soc_share_max);
    std::vector<Query> out;
    for (std::size_t i = 0; i < count; ++i)
    {
        const auto s = pick(rng);
        const auto t = pick(rng);
        out.push_back({s, t, detail::to_micro(share(rng) * g.capacity())});
    }
    return out;
}

} // namespace charge

#endif
