#ifndef CHARGE_POTENTIALS_HPP
#define CHARGE_POTENTIALS_HPP

#include "charge/cfp.hpp"
#include "charge/convex_bound.hpp"
#include "charge/graph.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <tuple>
#include <vector>

namespace charge
{

struct BackEdge
{
    vertex_id tail;
    double drive_time; // minimum over parallel arcs
    double consumption;
    double omega;
    std::uint32_t bound;
};

// Reverse adjacency with parallel arcs folded into one edge per vertex pair.
class BackwardGraph
{
  public:
    struct Item
    {
        vertex_id tail;
        vertex_id head;
        double drive_time;
        double consumption;
    };

    BackwardGraph() = default;

    BackwardGraph(std::size_t n, std::vector<Item> items, std::vector<double> station_slope, double capacity)
        : n_(n), capacity_(capacity), station_slope_(std::move(station_slope))
    {
        cf_max_ = 0;
        for (double s : station_slope_)
            cf_max_ = std::max(cf_max_, s);
        for (const auto &it : items)
            recuperation_ = std::max(recuperation_, -it.consumption / it.drive_time);
        std::sort(items.begin(), items.end(), [](const Item &a, const Item &b) {
            return std::tie(a.head, a.tail, a.drive_time, a.consumption) <
                   std::tie(b.head, b.tail, b.drive_time, b.consumption);
        });
        begin_.assign(n_ + 1, 0);
        for (std::size_t i = 0; i < items.size();)
        {
            std::size_t j = i;
            BackEdge e{items[i].tail, inf, inf, inf, 0};
            std::vector<BoundPoint> pts;
            while (j < items.size() && items[j].head == items[i].head && items[j].tail == items[i].tail)
            {
                e.drive_time = std::min(e.drive_time, items[j].drive_time);
                e.consumption = std::min(e.consumption, items[j].consumption);
                e.omega = std::min(e.omega, omega_weight(items[j].drive_time, items[j].consumption));
                pts.push_back({items[j].consumption, items[j].drive_time});
                ++j;
            }
            e.bound = static_cast<std::uint32_t>(bounds_.size());
            bounds_.push_back(lower_hull(std::move(pts)));
            edges_.push_back(e);
            ++begin_[items[i].head + 1];
            i = j;
        }
        for (std::size_t v = 0; v < n_; ++v)
            begin_[v + 1] += begin_[v];
    }

    static BackwardGraph from_graph(const Graph &g)
    {
        std::vector<Item> items;
        items.reserve(g.arc_count());
        for (const auto &a : g.arcs())
            items.push_back({a.tail, a.head, a.drive_time, a.consumption});
        return BackwardGraph(g.vertex_count(), std::move(items), station_slopes(g), g.capacity());
    }

    static std::vector<double> station_slopes(const Graph &g)
    {
        std::vector<double> slope(g.vertex_count(), 0.0);
        for (const auto &s : g.stations())
            slope[s.vertex] = s.function.max_slope();
        return slope;
    }

    std::size_t vertex_count() const { return n_; }
    double capacity() const { return capacity_; }
    double max_slope() const { return cf_max_; }
    // Largest energy regained per second of driving on any edge.
    double recuperation_rate() const { return recuperation_; }
    double station_slope(vertex_id v) const { return station_slope_[v]; }
    std::span<const BackEdge> in_edges(vertex_id v) const
    {
        return {edges_.data() + begin_[v], edges_.data() + begin_[v + 1]};
    }
    const ConvexBound &bound(std::uint32_t i) const { return bounds_[i]; }

    double omega_weight(double drive_time, double consumption) const
    {
        return cf_max_ > 0 ? drive_time + consumption / cf_max_ : inf;
    }

  private:
    std::size_t n_ = 0;
    double capacity_ = 1;
    double cf_max_ = 0;
    double recuperation_ = 0;
    std::vector<double> station_slope_;
    std::vector<std::size_t> begin_{0};
    std::vector<BackEdge> edges_;
    std::vector<ConvexBound> bounds_;
};

struct OmegaTables
{
    std::vector<double> time;
    std::vector<double> consumption; // inf when above capacity
    std::vector<double> omega;
    double max_slope = 0;
};

namespace detail
{
// FIFO label-correcting search; arc weights may be negative but no cycle is.
template <class Weight>
std::vector<double> backward_correcting(const BackwardGraph &bg, vertex_id target, Weight &&weight)
{
    std::vector<double> dist(bg.vertex_count(), inf);
    std::vector<char> queued(bg.vertex_count(), 0);
    std::deque<vertex_id> queue;
    dist[target] = 0;
    queue.push_back(target);
    queued[target] = 1;
    while (!queue.empty())
    {
        const auto v = queue.front();
        queue.pop_front();
        queued[v] = 0;
        for (const auto &e : bg.in_edges(v))
        {
            const double w = weight(e);
            if (w == inf)
                continue;
            const double d = dist[v] + w;
            if (d < dist[e.tail])
            {
                dist[e.tail] = d;
                if (!queued[e.tail])
                {
                    queued[e.tail] = 1;
                    queue.push_back(e.tail);
                }
            }
        }
    }
    return dist;
}
} // namespace detail

inline OmegaTables compute_omega_tables(const BackwardGraph &bg, vertex_id target)
{
    OmegaTables t;
    t.max_slope = bg.max_slope();
    const auto n = bg.vertex_count();
    t.time.assign(n, inf);
    using item = std::pair<double, vertex_id>;
    std::priority_queue<item, std::vector<item>, std::greater<>> heap;
    t.time[target] = 0;
    heap.push({0, target});
    while (!heap.empty())
    {
        const auto [d, v] = heap.top();
        heap.pop();
        if (d > t.time[v])
            continue;
        for (const auto &e : bg.in_edges(v))
            if (d + e.drive_time < t.time[e.tail])
            {
                t.time[e.tail] = d + e.drive_time;
                heap.push({t.time[e.tail], e.tail});
            }
    }
    t.consumption = detail::backward_correcting(bg, target, [](const BackEdge &e) { return e.consumption; });
    for (auto &c : t.consumption)
        if (c > bg.capacity())
            c = inf;
    t.omega = detail::backward_correcting(bg, target, [](const BackEdge &e) { return e.omega; });
    return t;
}

// Lower bound from unrestricted driving time and from omega weights, where
// every consumed unit has to be recharged at the best rate in the network.
class OmegaPotential
{
  public:
    OmegaPotential() = default;
    explicit OmegaPotential(OmegaTables tables) : t_(std::move(tables)) {}

    const OmegaTables &tables() const { return t_; }

    double potential(vertex_id v, double soc) const
    {
        if (soc == neg_inf || t_.time[v] == inf)
            return inf;
        if (t_.max_slope > 0)
            return std::max(t_.time[v], t_.omega[v] - soc / t_.max_slope);
        return soc >= t_.consumption[v] ? t_.time[v] : inf;
    }

    double key(vertex_id v, const SocFunction &f)
    {
        const double t1 = f.min_feasible();
        if (t1 == inf)
            return inf;
        double best = t1 + potential(v, f.eval(t1));
        const double need = t_.consumption[v];
        if (need < inf)
        {
            const double t2 = f.first_time_reaching(need);
            if (t2 < inf)
                best = std::min(best, t2 + potential(v, std::max(f.eval(t2), need)));
        }
        return best;
    }

  private:
    OmegaTables t_;
};

// min over t of t + F(f(t)), scanning breakpoints of f and preimages of
// breakpoints of F.
inline double bound_key(const ConvexBound &bound, const SocFunction &f)
{
    if (bound.empty())
        return inf;
    const double start = f.min_feasible();
    if (start == inf)
        return inf;
    double best = inf;
    for (const auto &p : f.breakpoints())
        best = std::min(best, p.time + bound.eval(p.soc));
    for (const auto &q : bound.points())
    {
        const double t = f.first_time_reaching(q.soc);
        if (t < inf)
            best = std::min(best, t + bound.eval(std::max(f.eval(t), q.soc)));
    }
    return best;
}

struct SuspendRule
{
    double factor = 2.0;
    double additive = 3600.0;
};

// Label-correcting backward search propagating convex lower bounds.
// Complete mode drains the queue; on-demand mode runs only as far as
// requested and answers with the bound merged with the current queue key.
class BoundSearch
{
  public:
    BoundSearch(const BackwardGraph &bg, vertex_id target, bool on_demand = false, SuspendRule rule = {})
        : bg_(&bg), target_(target), on_demand_(on_demand), rule_(rule)
    {
        const auto n = bg.vertex_count();
        bounds_.assign(n, {});
        scanned_bound_.assign(n, {});
        scanned_.assign(n, 0);
        key_.assign(n, inf);
        bounds_[target] = ConvexBound::single(0, 0);
        set_key(target);
    }

    bool on_demand() const { return on_demand_; }
    bool done() const { return queue_empty(); }
    std::uint64_t scans() const { return scans_; }

    void run()
    {
        while (step())
        {
        }
    }

    // Scans one vertex; false if the queue is empty.
    bool step()
    {
        const auto v = pop();
        if (v == invalid_vertex)
            return false;
        ++scans_;
        if (bg_->station_slope(v) > 0)
            bounds_[v] = extend_bound(bounds_[v], bg_->station_slope(v));
        scanned_bound_[v] = bounds_[v];
        scanned_[v] = 1;
        const auto &fv = bounds_[v];
        for (const auto &e : bg_->in_edges(v))
        {
            const auto &edge_bound = bg_->bound(e.bound);
            ConvexBound g = edge_bound.size() == 1
                                ? shift_bound(fv, edge_bound.points()[0].soc, edge_bound.points()[0].time)
                                : link_convex_bounds(edge_bound, fv);
            if (improves_somewhere(g, bounds_[e.tail]))
            {
                bounds_[e.tail] = merge_bounds(bounds_[e.tail], g);
                set_key(e.tail);
            }
        }
        return true;
    }

    double min_key()
    {
        clean_top();
        return heap_.empty() ? inf : heap_.top().first;
    }

    // Makes the bound of v usable: scans v, then keeps going until the queue
    // key is well past the bound's largest value.
    void ensure(vertex_id v)
    {
        if (!on_demand_)
            return;
        while (!scanned_[v] && step())
        {
        }
        if (bounds_[v].empty())
            return;
        const double t1 = bounds_[v].points().front().time;
        const double threshold = std::min(rule_.factor * t1, t1 + rule_.additive);
        while (min_key() <= threshold && step())
        {
        }
    }

    const ConvexBound &bound(vertex_id v) const { return bounds_[v]; }

    // Bound usable as a potential right now: the current bound merged with a
    // breakpoint at the queue minimum t*. The breakpoint sits at SoC
    // -rate * t* rather than 0 so that edges regaining energy cannot make
    // the merged bounds inconsistent.
    ConvexBound potential_bound(vertex_id v)
    {
        const double t_star = min_key();
        if (t_star == inf)
            return bounds_[v];
        return merge_bounds(bounds_[v], ConvexBound::single(-bg_->recuperation_rate() * t_star, t_star));
    }

  private:
    using entry = std::pair<double, vertex_id>;

    void set_key(vertex_id v)
    {
        double k = inf;
        if (on_demand_)
        {
            const auto &old = scanned_bound_[v].points();
            for (const auto &p : bounds_[v].points())
                if (std::find(old.begin(), old.end(), p) == old.end())
                    k = std::min(k, p.time);
        }
        else
        {
            k = bounds_[v].min_value();
        }
        if (k == inf)
            return;
        key_[v] = k;
        heap_.push({k, v});
    }

    void clean_top()
    {
        while (!heap_.empty() && heap_.top().first != key_[heap_.top().second])
            heap_.pop();
    }

    bool queue_empty() const
    {
        auto copy = heap_;
        while (!copy.empty() && copy.top().first != key_[copy.top().second])
            copy.pop();
        return copy.empty();
    }

    vertex_id pop()
    {
        clean_top();
        if (heap_.empty())
            return invalid_vertex;
        const auto v = heap_.top().second;
        heap_.pop();
        key_[v] = inf;
        return v;
    }

    const BackwardGraph *bg_;
    vertex_id target_;
    bool on_demand_;
    SuspendRule rule_;
    std::vector<ConvexBound> bounds_;
    std::vector<ConvexBound> scanned_bound_;
    std::vector<char> scanned_;
    std::vector<double> key_;
    std::priority_queue<entry, std::vector<entry>, std::greater<>> heap_;
    std::uint64_t scans_ = 0;
};

class BoundPotential
{
  public:
    explicit BoundPotential(BoundSearch &search) : search_(&search) {}

    double potential(vertex_id v, double soc)
    {
        search_->ensure(v);
        return search_->potential_bound(v).eval(soc);
    }

    double key(vertex_id v, const SocFunction &f)
    {
        search_->ensure(v);
        return bound_key(search_->potential_bound(v), f);
    }

  private:
    BoundSearch *search_;
};

enum class PotentialKind
{
    zero,
    omega,
    pi,
    pi_on_demand
};

// Plain search over all original arcs, guided by the chosen potential.
inline QueryResult astar_query(const Graph &g, vertex_id s, vertex_id t, double initial_soc, PotentialKind kind,
                               SuspendRule rule = {})
{
    if (s >= g.vertex_count() || t >= g.vertex_count())
        throw validation_error("query vertex out of range");
    if (kind == PotentialKind::zero)
        return cfp_query(g, s, t, initial_soc);
    const PlainSearchGraph sg(g);
    const auto bg = BackwardGraph::from_graph(g);
    if (kind == PotentialKind::omega)
    {
        OmegaPotential pot(compute_omega_tables(bg, t));
        return CfpSearch<PlainSearchGraph, OmegaPotential>(sg, pot).run(s, t, initial_soc);
    }
    BoundSearch search(bg, t, kind == PotentialKind::pi_on_demand, rule);
    if (!search.on_demand())
        search.run();
    BoundPotential pot(search);
    return CfpSearch<PlainSearchGraph, BoundPotential>(sg, pot).run(s, t, initial_soc);
}

} // namespace charge

#endif
