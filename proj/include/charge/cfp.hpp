#ifndef CHARGE_CFP_HPP
#define CHARGE_CFP_HPP

#include "charge/charging_function.hpp"
#include "charge/graph.hpp"
#include "charge/itinerary.hpp"
#include "charge/soc_profile.hpp"

#include <algorithm>
#include <cstdint>
#include <queue>
#include <tuple>
#include <vector>

namespace charge
{

// SoC at a vertex as a function of trip time, induced by the last station
// (arrival SoC, its charging curve) and the profile of the path since then.
// Never materialized per label; breakpoints are derived on request.
class SocFunction
{
  public:
    SocFunction(double trip, double soc, const ChargingFunction &cf, const SocProfile &profile)
        : trip_(trip), soc_(soc), cf_(&cf), profile_(profile)
    {
    }

    double trip() const { return trip_; }
    double arrival_soc() const { return soc_; }
    const SocProfile &profile() const { return profile_; }
    const ChargingFunction &function() const { return *cf_; }

    double min_feasible() const
    {
        if (!profile_.feasible)
            return inf;
        if (profile_.in_min <= soc_)
            return trip_;
        if (profile_.in_min > cf_->max_charge())
            return inf;
        return trip_ + cf_->duration(soc_, profile_.in_min);
    }

    double eval(double t) const
    {
        const double start = min_feasible();
        if (t < start || start == inf)
            return neg_inf;
        double g = cf_->charge(soc_, t - trip_);
        if (g < profile_.in_min)
            g = profile_.in_min;
        return profile_.apply(g);
    }

    double final_value() const
    {
        if (min_feasible() == inf)
            return neg_inf;
        return profile_.apply(std::max(soc_, cf_->max_charge()));
    }

    // Least trip time with eval(t) >= target, or inf.
    double first_time_reaching(double target) const
    {
        const double start = min_feasible();
        if (start == inf)
            return inf;
        if (eval(start) >= target)
            return start;
        if (target > profile_.out_max)
            return inf;
        const double need = target + profile_.cost;
        if (need > cf_->max_charge())
            return inf;
        return std::max(start, trip_ + cf_->duration(soc_, need));
    }

    // Breakpoints (time, SoC) of the finite part, ending where f turns constant.
    std::vector<CurvePoint> breakpoints() const
    {
        std::vector<CurvePoint> out;
        const double start = min_feasible();
        if (start == inf)
            return out;
        std::vector<double> times{start};
        const double top = std::max(soc_, cf_->max_charge());
        if (soc_ < cf_->max_charge())
        {
            const double x0 = cf_->inverse(soc_);
            for (const auto &p : cf_->points())
                if (p.time > x0)
                {
                    const double t = trip_ + (p.time - x0);
                    if (t > start)
                        times.push_back(t);
                }
            const double cap = profile_.out_max + profile_.cost;
            if (cap > soc_ && cap < top)
            {
                const double t = trip_ + (cf_->inverse(cap) - x0);
                if (t > start)
                    times.push_back(t);
            }
        }
        std::sort(times.begin(), times.end());
        times.erase(std::unique(times.begin(), times.end()), times.end());
        const double last = final_value();
        for (double t : times)
        {
            out.push_back({t, eval(t)});
            if (out.back().soc >= last)
                break;
        }
        return out;
    }

  private:
    double trip_;
    double soc_;
    const ChargingFunction *cf_;
    SocProfile profile_;
};

// Pointwise f_a >= f_b, by a merged scan over both breakpoint sequences.
inline bool dominates(const SocFunction &a, const SocFunction &b)
{
    const double mb = b.min_feasible();
    if (mb == inf)
        return true;
    const double ma = a.min_feasible();
    if (ma == inf || ma > mb + epsilon)
        return false;
    const auto check = [&](double t) { return a.eval(std::max(t, ma)) >= b.eval(t) - epsilon; };
    if (!check(mb))
        return false;
    for (const auto &p : b.breakpoints())
        if (!check(p.time))
            return false;
    for (const auto &p : a.breakpoints())
        if (p.time > mb && !check(p.time))
            return false;
    return true;
}

// Charging durations at the previous station worth switching at, ascending.
inline std::vector<double> switching_candidates(const SocFunction &f, const ChargingFunction &next)
{
    std::vector<double> out;
    const double start = f.min_feasible();
    if (start == inf)
        return out;
    if (f.function().is_swap() || next.is_swap())
        return {start - f.trip()};
    for (const auto &p : f.breakpoints())
        out.push_back(p.time - f.trip());
    return out;
}

struct SpawnPoint
{
    double trip;
    double soc;
};

// Labels at the new station spawned from f: one per switching candidate,
// skipped when the arrival SoC already reaches the new curve's top.
inline std::vector<SpawnPoint> spawn_points(const SocFunction &f, const ChargingFunction &next)
{
    std::vector<SpawnPoint> out;
    for (double delta : switching_candidates(f, next))
    {
        const double soc = f.eval(f.trip() + delta);
        if (soc == neg_inf || soc >= next.max_charge())
            continue;
        out.push_back({f.trip() + delta + next.init_time(), soc});
    }
    return out;
}

inline constexpr std::uint32_t no_label = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::uint32_t spawn_step = std::numeric_limits<std::uint32_t>::max();

struct Label
{
    double trip;
    double soc;
    std::uint32_t station; // index into the search's function table
    vertex_id vertex;
    SocProfile profile;
    std::uint32_t pred;
    std::uint32_t arc; // arc reference from pred, or spawn_step
};

struct ZeroPotential
{
    double key(vertex_id, const SocFunction &f) { return f.min_feasible(); }
};

struct CfpOptions
{
    bool one_label_per_head = false;
};

// Graph view used by the plain algorithm: every original arc.
class PlainSearchGraph
{
  public:
    explicit PlainSearchGraph(const Graph &g) : g_(&g) {}

    const Graph &graph() const { return *g_; }

    template <class F> void for_each_out(vertex_id v, F &&fn) const
    {
        for (const auto &a : g_->out_arcs(v))
            fn(a.head, a.drive_time, a.profile, a.arc);
    }

    void expand(std::uint32_t arc, std::vector<std::uint32_t> &out) const { out.push_back(arc); }

  private:
    const Graph *g_;
};

// Label-setting search over SoC-function labels with charging-station
// spawning. SearchGraph supplies arcs and unpacking; Potential supplies keys.
template <class SearchGraph, class Potential> class CfpSearch
{
  public:
    CfpSearch(const SearchGraph &sg, Potential &pot, CfpOptions opt = {}) : sg_(sg), pot_(pot), opt_(opt)
    {
        const auto &g = sg_.graph();
        for (const auto &s : g.stations())
        {
            functions_.push_back(&s.function);
            station_vertex_.push_back(s.vertex);
        }
    }

    QueryResult run(vertex_id s, vertex_id t, double initial_soc)
    {
        const auto &g = sg_.graph();
        if (s >= g.vertex_count() || t >= g.vertex_count())
            throw std::out_of_range("query vertex out of range");
        if (initial_soc < 0 || initial_soc > g.capacity())
            throw validation_error("initial SoC outside [0, M]");
        reset(initial_soc);

        push(Label{0, initial_soc, dummy_index(), s, SocProfile::identity(g.capacity()), no_label, spawn_step});

        QueryResult result;
        while (!heap_.empty())
        {
            const auto top = heap_.top();
            heap_.pop();
            const Label lab = labels_[top.id];
            const vertex_id v = lab.vertex;
            const SocFunction f = function_of(lab);

            const double start = f.min_feasible();
            const double last = f.final_value();
            bool dominated = false;
            for (const auto &other : settled_[v])
            {
                // Cheap necessary conditions first.
                if (other.start > start + epsilon || other.last < last - epsilon)
                    continue;
                ++dominance_checks_;
                if (dominates(function_of(labels_[other.id]), f))
                {
                    dominated = true;
                    break;
                }
            }
            if (dominated)
                continue;
            settled_[v].push_back({top.id, start, last});
            ++labels_settled_;

            if (v == t)
            {
                result.status = QueryStatus::ok;
                result.itinerary = retrieve(top.id);
                break;
            }

            if (g.is_station(v) && station_vertex(lab.station) != v)
                spawn(top.id, lab, f);

            scan(top.id, lab);
        }
        result.labels_settled = labels_settled_;
        result.dominance_checks = dominance_checks_;
        return result;
    }

    const std::vector<Label> &labels() const { return labels_; }

    SocFunction function_of(const Label &l) const { return SocFunction(l.trip, l.soc, fn(l.station), l.profile); }

  private:
    struct Entry
    {
        double key;
        double soc;
        vertex_id vertex;
        std::uint32_t id;
    };
    struct Later
    {
        bool operator()(const Entry &a, const Entry &b) const
        {
            if (a.key != b.key)
                return a.key > b.key;
            if (a.soc != b.soc)
                return a.soc < b.soc;
            if (a.vertex != b.vertex)
                return a.vertex > b.vertex;
            return a.id > b.id;
        }
    };

    std::uint32_t dummy_index() const { return static_cast<std::uint32_t>(functions_.size()); }
    const ChargingFunction &fn(std::uint32_t idx) const
    {
        return idx == dummy_index() ? dummy_ : *functions_[idx];
    }
    vertex_id station_vertex(std::uint32_t idx) const
    {
        return idx == dummy_index() ? invalid_vertex : station_vertex_[idx];
    }

    void reset(double initial_soc)
    {
        dummy_ = ChargingFunction::make_constant(initial_soc);
        labels_.clear();
        heap_ = {};
        settled_.assign(sg_.graph().vertex_count(), {});
        labels_settled_ = 0;
        dominance_checks_ = 0;
    }

    // Returns false if the label is infeasible or has no finite key.
    bool push(const Label &l)
    {
        const SocFunction f = function_of(l);
        const double start = f.min_feasible();
        if (start == inf)
            return false;
        const double key = pot_.key(l.vertex, f);
        if (!(key < inf))
            return false;
        const auto id = static_cast<std::uint32_t>(labels_.size());
        labels_.push_back(l);
        heap_.push({key, f.eval(start), l.vertex, id});
        return true;
    }

    void spawn(std::uint32_t id, const Label &lab, const SocFunction &f)
    {
        const auto &g = sg_.graph();
        const vertex_id w = lab.vertex;
        const auto idx = static_cast<std::uint32_t>(g.station_index(w));
        const auto &cf = *functions_[idx];
        for (const auto &p : spawn_points(f, cf))
            push(Label{p.trip, p.soc, idx, w, SocProfile::identity(g.capacity()), id, spawn_step});
    }

    void scan(std::uint32_t id, const Label &lab)
    {
        const double top = fn(lab.station).max_charge();
        candidates_.clear();
        sg_.for_each_out(lab.vertex, [&](vertex_id head, double drive, const SocProfile &p, std::uint32_t arc) {
            const auto linked = link_profiles(lab.profile, p);
            if (!linked.feasible || linked.in_min > top)
                return;
            candidates_.push_back(Label{lab.trip + drive, lab.soc, lab.station, head, linked, id, arc});
        });
        if (!opt_.one_label_per_head)
        {
            for (const auto &c : candidates_)
                push(c);
            return;
        }
        // Keep only the minimum-key candidate per head; earlier arcs win ties.
        std::vector<std::pair<double, std::size_t>> best;
        std::vector<vertex_id> heads;
        for (std::size_t i = 0; i < candidates_.size(); ++i)
        {
            const auto &c = candidates_[i];
            const SocFunction f = function_of(c);
            if (f.min_feasible() == inf)
                continue;
            const double key = pot_.key(c.vertex, f);
            if (!(key < inf))
                continue;
            auto it = std::find(heads.begin(), heads.end(), c.vertex);
            if (it == heads.end())
            {
                heads.push_back(c.vertex);
                best.push_back({key, i});
            }
            else
            {
                auto &b = best[it - heads.begin()];
                if (key < b.first)
                    b = {key, i};
            }
        }
        for (const auto &b : best)
            push(candidates_[b.second]);
    }

    Itinerary retrieve(std::uint32_t final_id) const
    {
        std::vector<std::uint32_t> chain;
        for (auto id = final_id; id != no_label; id = labels_[id].pred)
            chain.push_back(id);
        std::reverse(chain.begin(), chain.end());

        const auto &g = sg_.graph();
        Itinerary it;
        it.path.push_back(labels_[chain.front()].vertex);

        struct Open
        {
            bool active = false;
            std::size_t position = 0;
            vertex_id vertex = invalid_vertex;
            double arrival = 0;
            double init = 0;
            std::uint32_t station = 0;
        } open;

        const auto close = [&](double duration) {
            if (!open.active)
                return;
            const auto &cf = fn(open.station);
            duration = std::max(0.0, duration);
            it.stops.push_back({open.position, open.vertex, open.arrival, cf.charge(open.arrival, duration), duration,
                                open.init});
            open.active = false;
        };

        std::vector<std::uint32_t> expanded;
        for (std::size_t j = 1; j < chain.size(); ++j)
        {
            const auto &prev = labels_[chain[j - 1]];
            const auto &cur = labels_[chain[j]];
            if (cur.arc == spawn_step)
            {
                const auto &cf = fn(cur.station);
                close(cur.trip - prev.trip - cf.init_time());
                open = {true, it.path.size() - 1, cur.vertex, cur.soc, cf.init_time(), cur.station};
                continue;
            }
            expanded.clear();
            sg_.expand(cur.arc, expanded);
            for (auto a : expanded)
            {
                const auto &arc = g.arcs()[a];
                it.arcs.push_back(a);
                it.path.push_back(arc.head);
                it.drive_time += arc.drive_time;
            }
        }
        const auto &last = labels_[chain.back()];
        const SocFunction f = function_of(last);
        close(f.min_feasible() - last.trip);
        it.trip_time = f.min_feasible();
        for (const auto &stop : it.stops)
            it.charge_time += stop.init_time + stop.duration;
        return it;
    }

    const SearchGraph &sg_;
    Potential &pot_;
    CfpOptions opt_;
    std::vector<const ChargingFunction *> functions_;
    std::vector<vertex_id> station_vertex_;
    ChargingFunction dummy_;
    std::vector<Label> labels_;
    std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
    struct Settled
    {
        std::uint32_t id;
        double start; // earliest feasible trip time
        double last;  // final SoC
    };
    std::vector<std::vector<Settled>> settled_;
    std::vector<Label> candidates_;
    std::uint64_t labels_settled_ = 0;
    std::uint64_t dominance_checks_ = 0;
};

inline QueryResult cfp_query(const Graph &g, vertex_id s, vertex_id t, double initial_soc)
{
    PlainSearchGraph sg(g);
    ZeroPotential pot;
    CfpSearch<PlainSearchGraph, ZeroPotential> search(sg, pot);
    return search.run(s, t, initial_soc);
}

} // namespace charge

#endif
