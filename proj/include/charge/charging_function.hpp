#ifndef CHARGE_CHARGING_FUNCTION_HPP
#define CHARGE_CHARGING_FUNCTION_HPP

#include "charge/common.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace charge
{

struct CurvePoint
{
    double time;
    double soc;

    friend bool operator==(const CurvePoint &, const CurvePoint &) = default;
};

// Univariate piecewise-linear charging curve c(t), SoC reached after t seconds
// when arriving empty. Charging from an arbitrary SoC goes through the
// expanded inverse.
class ChargingFunction
{
  public:
    enum class Kind
    {
        swap,
        curve
    };

    ChargingFunction() = default;

    static ChargingFunction make_swap(double capacity, double init_time)
    {
        if (!(init_time > 0))
            throw validation_error("swap station needs a positive init time");
        ChargingFunction f;
        f.kind_ = Kind::swap;
        f.points_ = {{0.0, capacity}};
        f.init_time_ = init_time;
        f.finish();
        return f;
    }

    static ChargingFunction make_curve(std::vector<CurvePoint> points, double init_time, double capacity)
    {
        ChargingFunction f;
        f.kind_ = Kind::curve;
        f.points_ = std::move(points);
        f.init_time_ = init_time;
        f.validate(capacity);
        f.finish();
        return f;
    }

    // Constant curve used for the virtual source station; skips the checks
    // that apply to real stations.
    static ChargingFunction make_constant(double soc)
    {
        ChargingFunction f;
        f.kind_ = Kind::curve;
        f.points_ = {{0.0, soc}};
        f.init_time_ = 0;
        f.finish();
        return f;
    }

    Kind kind() const { return kind_; }
    bool is_swap() const { return kind_ == Kind::swap; }
    const std::vector<CurvePoint> &points() const { return points_; }
    double init_time() const { return init_time_; }
    double min_charge() const { return points_.front().soc; }
    double max_charge() const { return points_.back().soc; }
    double max_time() const { return points_.back().time; }
    double max_slope() const { return max_slope_; }
    double min_segment_slope() const { return min_slope_; }

    // c(t)
    double curve_at(double t) const
    {
        if (t <= 0)
            return points_.front().soc;
        if (t >= points_.back().time)
            return points_.back().soc;
        const auto it = std::upper_bound(points_.begin(), points_.end(), t,
                                         [](double x, const CurvePoint &p) { return x < p.time; });
        const auto &hi = *it;
        const auto &lo = *(it - 1);
        return lo.soc + (hi.soc - lo.soc) * (t - lo.time) / (hi.time - lo.time);
    }

    // Expanded inverse: 0 below min_charge, max_time at or above max_charge.
    double inverse(double soc) const
    {
        if (soc < points_.front().soc)
            return 0;
        if (soc >= points_.back().soc)
            return points_.back().time;
        const auto it = std::upper_bound(points_.begin(), points_.end(), soc,
                                         [](double x, const CurvePoint &p) { return x < p.soc; });
        const auto &hi = *it;
        const auto &lo = *(it - 1);
        return lo.time + (hi.time - lo.time) * (soc - lo.soc) / (hi.soc - lo.soc);
    }

    // Departure SoC after charging `t` seconds from arrival SoC `soc`.
    // Charging never lowers the SoC.
    double charge(double soc, double t) const
    {
        if (soc >= max_charge())
            return soc;
        return curve_at(inverse(soc) + t);
    }

    // Minimum charging time from `from` to `to`; infinite if `to` is out of reach.
    double duration(double from, double to) const
    {
        if (to <= from)
            return 0;
        if (to > max_charge())
            return inf;
        return std::max(0.0, inverse(to) - inverse(from));
    }

    friend bool operator==(const ChargingFunction &a, const ChargingFunction &b)
    {
        return a.kind_ == b.kind_ && a.points_ == b.points_ && a.init_time_ == b.init_time_;
    }

  private:
    void validate(double capacity) const
    {
        if (points_.empty())
            throw validation_error("charging curve has no breakpoints");
        if (points_.front().time != 0)
            throw validation_error("charging curve must start at time 0");
        if (!(init_time_ >= 0))
            throw validation_error("negative init time");
        for (std::size_t i = 0; i < points_.size(); ++i)
        {
            if (points_[i].soc < 0 || points_[i].soc > capacity)
                throw validation_error("charging curve SoC outside [0, capacity]");
            if (i > 0 && !(points_[i].time > points_[i - 1].time))
                throw validation_error("charging curve times not strictly increasing");
            if (i > 0 && !(points_[i].soc > points_[i - 1].soc))
                throw validation_error("charging curve SoC not strictly increasing");
        }
        for (std::size_t i = 2; i < points_.size(); ++i)
        {
            const double s1 = (points_[i - 1].soc - points_[i - 2].soc) / (points_[i - 1].time - points_[i - 2].time);
            const double s2 = (points_[i].soc - points_[i - 1].soc) / (points_[i].time - points_[i - 1].time);
            if (s2 > s1 * (1 + 1e-12))
                throw validation_error("charging curve is not concave");
        }
        if (points_.front().soc > 0 && init_time_ == 0)
            throw validation_error("curve with positive minimum SoC needs a positive init time");
    }

    void finish()
    {
        max_slope_ = 0;
        min_slope_ = inf;
        for (std::size_t i = 1; i < points_.size(); ++i)
        {
            const double s = (points_[i].soc - points_[i - 1].soc) / (points_[i].time - points_[i - 1].time);
            max_slope_ = std::max(max_slope_, s);
            min_slope_ = std::min(min_slope_, s);
        }
        if (points_.front().soc > 0 && init_time_ > 0)
            max_slope_ = std::max(max_slope_, points_.front().soc / init_time_);
        else if (points_.front().soc > 0)
            max_slope_ = inf;
    }

    Kind kind_ = Kind::curve;
    std::vector<CurvePoint> points_{{0.0, 0.0}};
    double init_time_ = 0;
    double max_slope_ = 0;
    double min_slope_ = inf;
};

} // namespace charge

#endif
