#ifndef CHARGE_TEST_FIXTURES_HPP
#define CHARGE_TEST_FIXTURES_HPP

#include "charge/graph.hpp"

#include <random>
#include <vector>

namespace charge::fixtures
{

// Eight-vertex line s, v1, ..., v6, t with stations at v2 and v5.
inline Graph line_with_two_stations()
{
    const double M = 5;
    std::vector<Arc> arcs{{0, 1, 1, -2}, {1, 2, 1, 4}, {2, 3, 1, -1}, {3, 4, 1, 3},
                          {4, 5, 1, -1}, {5, 6, 1, 2}, {6, 7, 1, 1}};
    std::vector<Station> stations{
        {2, ChargingFunction::make_curve({{0, 0}, {1.5, 3}, {5.5, 5}}, 0, M), std::nullopt},
        {5, ChargingFunction::make_curve({{0, 0}, {5, 5}}, 0, M), std::nullopt}};
    return Graph(8, arcs, stations, M);
}

inline ChargingFunction four_segment_curve(double M = 6)
{
    return ChargingFunction::make_curve({{0, 0}, {3, 4.5}, {5, 5.5}, {7, 6}}, 0, M);
}

inline ChargingFunction three_segment_curve(double M = 4)
{
    return ChargingFunction::make_curve({{0, 0}, {1, 2}, {2, 3}, {5, 4}}, 0, M);
}

// Random concave curve with `segments` pieces ending at `top`.
inline ChargingFunction random_curve(std::mt19937_64 &rng, double M, int segments, double init)
{
    std::uniform_real_distribution<double> u(0.2, 1.0);
    std::vector<double> slopes;
    for (int i = 0; i < segments; ++i)
        slopes.push_back(u(rng));
    std::sort(slopes.rbegin(), slopes.rend());
    const double top = M * std::uniform_real_distribution<double>(0.6, 1.0)(rng);
    std::vector<double> widths;
    double total = 0;
    for (int i = 0; i < segments; ++i)
    {
        widths.push_back(u(rng));
        total += widths.back();
    }
    std::vector<CurvePoint> pts{{0, 0}};
    double t = 0, b = 0;
    for (int i = 0; i < segments; ++i)
    {
        const double db = top * widths[i] / total;
        t += db / slopes[i];
        b += db;
        pts.push_back({t, i + 1 == segments ? top : b});
    }
    return ChargingFunction::make_curve(pts, init, M);
}

} // namespace charge::fixtures

#endif
