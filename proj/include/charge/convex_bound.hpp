#ifndef CHARGE_CONVEX_BOUND_HPP
#define CHARGE_CONVEX_BOUND_HPP

#include "charge/common.hpp"

#include <algorithm>
#include <vector>

namespace charge
{

struct BoundPoint
{
    double soc;
    double time;

    friend bool operator==(const BoundPoint &, const BoundPoint &) = default;
};

// Decreasing convex piecewise-linear map SoC -> lower bound on remaining
// time. Infinite left of the first breakpoint, constant right of the last.
// No breakpoints means infinite everywhere.
class ConvexBound
{
  public:
    ConvexBound() = default;
    explicit ConvexBound(std::vector<BoundPoint> pts) : pts_(std::move(pts)) {}

    static ConvexBound single(double soc, double time) { return ConvexBound({{soc, time}}); }

    bool empty() const { return pts_.empty(); }
    const std::vector<BoundPoint> &points() const { return pts_; }
    std::size_t size() const { return pts_.size(); }

    double eval(double soc) const
    {
        if (pts_.empty() || soc == neg_inf || soc < pts_.front().soc)
            return inf;
        if (soc >= pts_.back().soc)
            return pts_.back().time;
        const auto it = std::upper_bound(pts_.begin(), pts_.end(), soc,
                                         [](double x, const BoundPoint &p) { return x < p.soc; });
        const auto &hi = *it;
        const auto &lo = *(it - 1);
        return lo.time + (hi.time - lo.time) * (soc - lo.soc) / (hi.soc - lo.soc);
    }

    double min_value() const { return pts_.empty() ? inf : pts_.back().time; }

    // Slope of segment i (points i -> i+1); 0 past the last point.
    double slope(std::size_t i) const
    {
        if (i + 1 >= pts_.size())
            return 0;
        return (pts_[i + 1].time - pts_[i].time) / (pts_[i + 1].soc - pts_[i].soc);
    }

    friend bool operator==(const ConvexBound &, const ConvexBound &) = default;

  private:
    std::vector<BoundPoint> pts_;
};

namespace detail
{
inline double cross(const BoundPoint &o, const BoundPoint &a, const BoundPoint &b)
{
    return (a.soc - o.soc) * (b.time - o.time) - (a.time - o.time) * (b.soc - o.soc);
}
} // namespace detail

// Lower convex hull of a point set, keeping only the decreasing staircase.
inline ConvexBound lower_hull(std::vector<BoundPoint> pts)
{
    std::sort(pts.begin(), pts.end(), [](const BoundPoint &a, const BoundPoint &b) {
        return a.soc < b.soc || (a.soc == b.soc && a.time < b.time);
    });
    std::vector<BoundPoint> stair;
    for (const auto &p : pts)
        if (stair.empty() || p.time < stair.back().time)
        {
            if (!stair.empty() && stair.back().soc == p.soc)
                stair.back() = p;
            else
                stair.push_back(p);
        }
    std::vector<BoundPoint> hull;
    for (const auto &p : stair)
    {
        while (hull.size() >= 2)
        {
            const auto &o = hull[hull.size() - 2];
            const auto &a = hull.back();
            // Drop `a` unless it lies strictly below the chord o-p.
            if (detail::cross(o, a, p) <= 0)
                hull.pop_back();
            else
                break;
        }
        hull.push_back(p);
    }
    return ConvexBound(std::move(hull));
}

inline ConvexBound merge_bounds(const ConvexBound &a, const ConvexBound &b)
{
    if (a.empty())
        return b;
    if (b.empty())
        return a;
    std::vector<BoundPoint> pts(a.points());
    pts.insert(pts.end(), b.points().begin(), b.points().end());
    return lower_hull(std::move(pts));
}

inline ConvexBound shift_bound(const ConvexBound &f, double consumption, double drive_time)
{
    std::vector<BoundPoint> pts(f.points());
    for (auto &p : pts)
    {
        p.soc += consumption;
        p.time += drive_time;
    }
    return ConvexBound(std::move(pts));
}

// Account for charging at a station whose fastest rate is `max_slope`.
inline ConvexBound extend_bound(const ConvexBound &f, double max_slope)
{
    if (f.empty() || !(max_slope > 0))
        return f;
    const double limit = -1.0 / max_slope;
    const auto &p = f.points();
    std::size_t i = 0;
    while (i + 1 < p.size() && f.slope(i) <= limit)
        ++i;
    if (p[i].soc <= 0)
        return f;
    std::vector<BoundPoint> out;
    out.push_back({0.0, p[i].time + p[i].soc / max_slope});
    out.insert(out.end(), p.begin() + static_cast<std::ptrdiff_t>(i), p.end());
    return ConvexBound(std::move(out));
}

// Minimum over splits of a + b (infimal convolution) by a slope-ordered merge.
inline ConvexBound link_convex_bounds(const ConvexBound &a, const ConvexBound &b)
{
    if (a.empty() || b.empty())
        return {};
    const auto &pa = a.points();
    const auto &pb = b.points();
    std::size_t i = 0, j = 0;
    std::vector<BoundPoint> out{{pa[0].soc + pb[0].soc, pa[0].time + pb[0].time}};
    while (i + 1 < pa.size() || j + 1 < pb.size())
    {
        const double sa = a.slope(i);
        const double sb = b.slope(j);
        if (sa < sb)
            ++i;
        else if (sb < sa)
            ++j;
        else
        {
            ++i;
            ++j;
        }
        out.push_back({pa[i].soc + pb[j].soc, pa[i].time + pb[j].time});
    }
    return ConvexBound(std::move(out));
}

// True if g is strictly below f somewhere (beyond tolerance).
inline bool improves_somewhere(const ConvexBound &g, const ConvexBound &f)
{
    if (g.empty())
        return false;
    if (f.empty())
        return true;
    if (g.points().front().soc < f.points().front().soc - epsilon)
        return true;
    for (const auto &p : g.points())
        if (p.time < f.eval(p.soc) - epsilon)
            return true;
    for (const auto &p : f.points())
        if (g.eval(p.soc) < p.time - epsilon)
            return true;
    return false;
}

} // namespace charge

#endif
