#ifndef CHARGE_SOC_PROFILE_HPP
#define CHARGE_SOC_PROFILE_HPP

#include "charge/common.hpp"

#include <algorithm>
#include <array>

namespace charge
{

// Battery-constrained SoC map of a path: needs at least `in_min` on entry,
// consumes `cost`, never leaves with more than `out_max`.
struct SocProfile
{
    double in_min = 0;
    double cost = 0;
    double out_max = 0;
    bool feasible = true;

    static SocProfile identity(double capacity) { return {0, 0, capacity, true}; }
    static SocProfile infeasible() { return {inf, 0, neg_inf, false}; }

    static SocProfile from_consumption(double consumption, double capacity)
    {
        return {std::max(0.0, consumption), consumption, std::min(capacity, capacity - consumption), true};
    }

    double apply(double soc) const
    {
        if (!feasible || soc == neg_inf || soc < in_min)
            return neg_inf;
        const double out = soc - cost;
        return out > out_max ? out_max : out;
    }

    // Breakpoints of apply() inside [0, capacity] plus both ends.
    std::array<double, 4> critical_socs(double capacity) const
    {
        return {0.0, capacity, in_min, out_max + cost};
    }

    friend bool operator==(const SocProfile &a, const SocProfile &b)
    {
        if (!a.feasible || !b.feasible)
            return a.feasible == b.feasible;
        return a.in_min == b.in_min && a.cost == b.cost && a.out_max == b.out_max;
    }
};

inline SocProfile link_profiles(const SocProfile &a, const SocProfile &b)
{
    if (!a.feasible || !b.feasible || a.out_max < b.in_min)
        return SocProfile::infeasible();
    SocProfile r;
    r.in_min = std::max(a.in_min, a.cost + b.in_min);
    r.out_max = std::min(b.out_max, a.out_max - b.cost);
    r.cost = std::max(a.cost + b.cost, a.in_min - b.out_max);
    return r;
}

// True iff apply(a, s) >= apply(b, s) for every s in [0, capacity].
inline bool profile_dominates(const SocProfile &a, const SocProfile &b, double capacity)
{
    if (!b.feasible)
        return true;
    if (!a.feasible || a.in_min > b.in_min)
        return false;
    const auto check = [&](double s) {
        if (s < b.in_min || s > capacity)
            return true;
        return a.apply(s) >= b.apply(s);
    };
    for (double s : a.critical_socs(capacity))
        if (!check(s))
            return false;
    for (double s : b.critical_socs(capacity))
        if (!check(s))
            return false;
    return true;
}

} // namespace charge

#endif
