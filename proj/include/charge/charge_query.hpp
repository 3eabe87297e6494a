#ifndef CHARGE_CHARGE_QUERY_HPP
#define CHARGE_CHARGE_QUERY_HPP

#include "charge/cfp.hpp"
#include "charge/overlay.hpp"
#include "charge/potentials.hpp"

#include <optional>
#include <queue>
#include <unordered_map>
#include <vector>

namespace charge
{

enum class QueryMode
{
    exact,
    heu_pi,
    heu_omega,
    heu_omega_aggressive
};

struct QueryPlan
{
    vertex_id source = 0;
    vertex_id target = 0;
    double soc = 0;
    PotentialKind potential = PotentialKind::pi;
    QueryMode mode = QueryMode::exact;
    SuspendRule suspend = {};
};

inline void validate_plan(const Graph &g, const Overlay &o, const QueryPlan &plan)
{
    if (!o.matches(g))
        throw validation_error("overlay was built for a different graph");
    if (plan.source >= g.vertex_count() || plan.target >= g.vertex_count())
        throw validation_error("query vertex out of range");
    if (!(plan.soc >= 0 && plan.soc <= g.capacity()))
        throw validation_error("initial SoC outside [0, M]");
    if (plan.mode == QueryMode::heu_omega_aggressive && !o.aggressive())
        throw validation_error("aggressive heuristic needs an aggressive overlay");
    if (plan.mode == QueryMode::exact && o.aggressive())
        throw validation_error("exact queries need a regular overlay");
    if (plan.mode == QueryMode::heu_pi && plan.potential != PotentialKind::pi &&
        plan.potential != PotentialKind::pi_on_demand)
        throw validation_error("heuristic pi needs a pi potential");
}

// Temporary shortcut v -> t found by the component search.
struct TempShortcut
{
    vertex_id tail;
    double drive_time;
    SocProfile profile;
    std::vector<std::uint32_t> edges; // overlay edges in path order
};

// Backward bicriteria search from t over downward edges; core vertices are
// reached but not expanded. Every nondominated label away from t becomes a
// temporary shortcut.
inline std::vector<TempShortcut> component_search(const Overlay &o, vertex_id t)
{
    struct Label
    {
        double drive;
        SocProfile profile;
        vertex_id vertex;
        std::uint32_t pred;
        std::uint32_t edge;
    };
    struct Entry
    {
        double drive;
        double in_min;
        std::uint32_t id;
        bool operator>(const Entry &x) const { return std::tie(drive, in_min, id) > std::tie(x.drive, x.in_min, x.id); }
    };
    const double M = o.capacity();
    std::vector<Label> labels{{0, SocProfile::identity(M), t, no_label, no_edge}};
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    heap.push({0, 0, 0});
    std::unordered_map<vertex_id, std::vector<std::uint32_t>> settled;
    std::vector<std::uint32_t> order;
    while (!heap.empty())
    {
        const auto id = heap.top().id;
        heap.pop();
        const auto lab = labels[id];
        auto &here = settled[lab.vertex];
        bool dominated = false;
        for (auto o_id : here)
            if (detail::edge_dominates(labels[o_id].drive, labels[o_id].profile, lab.drive, lab.profile, M))
            {
                dominated = true;
                break;
            }
        if (dominated)
            continue;
        here.push_back(id);
        order.push_back(id);
        if (o.in_core(lab.vertex))
            continue;
        for (auto e : o.down_in(lab.vertex))
        {
            const auto &x = o.edge(e);
            const auto p = link_profiles(x.profile, lab.profile);
            if (!p.feasible)
                continue;
            const auto nid = static_cast<std::uint32_t>(labels.size());
            labels.push_back({lab.drive + x.drive_time, p, x.tail, id, e});
            heap.push({lab.drive + x.drive_time, p.in_min, nid});
        }
    }
    std::vector<TempShortcut> out;
    for (auto id : order)
    {
        const auto &lab = labels[id];
        if (lab.vertex == t)
            continue;
        TempShortcut s{lab.vertex, lab.drive, lab.profile, {}};
        for (auto cur = id; labels[cur].edge != no_edge; cur = labels[cur].pred)
            s.edges.push_back(labels[cur].edge);
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const TempShortcut &a, const TempShortcut &b) { return a.tail < b.tail; });
    return out;
}

// Edges of the core with profile costs as consumption.
inline std::vector<BackwardGraph::Item> core_items(const Overlay &o)
{
    std::vector<BackwardGraph::Item> items;
    for (auto v : o.core_vertices())
        for (auto e : o.core_out(v))
        {
            const auto &x = o.edge(e);
            items.push_back({x.tail, x.head, x.drive_time, x.profile.cost});
        }
    return items;
}

// Lower bounds of all core edges, folded per vertex pair.
inline BackwardGraph core_bounds(const Graph &g, const Overlay &o)
{
    return BackwardGraph(g.vertex_count(), core_items(o), BackwardGraph::station_slopes(g), g.capacity());
}

// Search graph of the forward phase: upward edges in the components, core
// edges in the core, and the temporary shortcuts into the target.
class OverlaySearchGraph
{
  public:
    OverlaySearchGraph(const Graph &g, const Overlay &o, const std::vector<TempShortcut> &temps, bool omega_filter)
        : g_(&g), o_(&o), temps_(&temps), omega_filter_(omega_filter)
    {
        for (std::uint32_t i = 0; i < temps.size();)
        {
            auto j = i;
            std::uint32_t best = i;
            while (j < temps.size() && temps[j].tail == temps[i].tail)
            {
                if (temp_omega(j) < temp_omega(best))
                    best = j;
                ++j;
            }
            by_tail_[temps[i].tail] = {i, j, best};
            i = j;
        }
    }

    const Graph &graph() const { return *g_; }

    template <class F> void for_each_out(vertex_id v, F &&fn) const
    {
        const auto list = o_->in_core(v) ? o_->core_out(v) : o_->up_out(v);
        for (auto e : list)
        {
            if (omega_filter_ && !o_->omega_best(e))
                continue;
            const auto &x = o_->edge(e);
            fn(x.head, x.drive_time, x.profile, e);
        }
        const auto it = by_tail_.find(v);
        if (it == by_tail_.end())
            return;
        const auto [begin, end, best] = it->second;
        const auto base = static_cast<std::uint32_t>(o_->edges().size());
        for (auto i = begin; i < end; ++i)
        {
            if (omega_filter_ && i != best)
                continue;
            const auto &s = (*temps_)[i];
            fn(target_of(i), s.drive_time, s.profile, base + i);
        }
    }

    void expand(std::uint32_t arc, std::vector<std::uint32_t> &out) const
    {
        const auto base = static_cast<std::uint32_t>(o_->edges().size());
        if (arc < base)
        {
            o_->unpack(arc, out);
            return;
        }
        for (auto e : (*temps_)[arc - base].edges)
            o_->unpack(e, out);
    }

  private:
    struct Range
    {
        std::uint32_t begin, end, best;
    };

    double temp_omega(std::uint32_t i) const
    {
        const auto &s = (*temps_)[i];
        return omega_of(s.drive_time, s.profile.cost, o_->max_slope());
    }

    vertex_id target_of(std::uint32_t i) const { return o_->edge((*temps_)[i].edges.back()).head; }

    const Graph *g_;
    const Overlay *o_;
    const std::vector<TempShortcut> *temps_;
    bool omega_filter_;
    std::unordered_map<vertex_id, Range> by_tail_;
};

// Core potential with zero potential on component vertices.
template <class Inner> class CorePotential
{
  public:
    CorePotential(const Overlay &o, vertex_id target, Inner &inner) : o_(&o), target_(target), inner_(&inner) {}

    double key(vertex_id v, const SocFunction &f)
    {
        if (v == target_ || o_->in_core(v))
            return inner_->key(v, f);
        return f.min_feasible();
    }

  private:
    const Overlay *o_;
    vertex_id target_;
    Inner *inner_;
};

class ChargeEngine
{
  public:
    ChargeEngine(const Graph &g, const Overlay &o) : g_(&g), o_(&o), core_items_(core_items(o))
    {
        if (!o.matches(g))
            throw validation_error("overlay was built for a different graph");
        slopes_ = BackwardGraph::station_slopes(g);
    }

    QueryResult query(const QueryPlan &plan) const
    {
        validate_plan(*g_, *o_, plan);
        if (plan.source == plan.target)
        {
            QueryResult r;
            r.status = QueryStatus::ok;
            r.itinerary.path = {plan.source};
            return r;
        }
        const auto temps = component_search(*o_, plan.target);
        const bool omega_filter =
            plan.mode == QueryMode::heu_omega || plan.mode == QueryMode::heu_omega_aggressive;
        OverlaySearchGraph sg(*g_, *o_, temps, omega_filter);
        CfpOptions opt;
        opt.one_label_per_head = plan.mode == QueryMode::heu_pi;

        if (plan.potential == PotentialKind::zero)
        {
            ZeroPotential pot;
            return run(sg, pot, opt, plan);
        }
        const auto bg = backward_graph(temps);
        if (plan.potential == PotentialKind::omega)
        {
            OmegaPotential inner(compute_omega_tables(bg, plan.target));
            CorePotential<OmegaPotential> pot(*o_, plan.target, inner);
            return run(sg, pot, opt, plan);
        }
        BoundSearch search(bg, plan.target, plan.potential == PotentialKind::pi_on_demand, plan.suspend);
        if (!search.on_demand())
            search.run();
        BoundPotential inner(search);
        CorePotential<BoundPotential> pot(*o_, plan.target, inner);
        return run(sg, pot, opt, plan);
    }

    // Core edges plus temporary shortcuts leaving the core.
    BackwardGraph backward_graph(const std::vector<TempShortcut> &temps) const
    {
        auto items = core_items_;
        for (const auto &s : temps)
            if (o_->in_core(s.tail))
                items.push_back({s.tail, o_->edge(s.edges.back()).head, s.drive_time, s.profile.cost});
        return BackwardGraph(g_->vertex_count(), std::move(items), slopes_, g_->capacity());
    }

  private:
    template <class Pot> QueryResult run(const OverlaySearchGraph &sg, Pot &pot, CfpOptions opt, const QueryPlan &plan) const
    {
        const auto start = ChargingFunction::make_constant(plan.soc);
        const SocFunction f0(0, plan.soc, start, SocProfile::identity(g_->capacity()));
        const double bound = pot.key(plan.source, f0);
        CfpSearch<OverlaySearchGraph, Pot> search(sg, pot, opt);
        auto result = search.run(plan.source, plan.target, plan.soc);
        result.source_bound = bound;
        return result;
    }

    const Graph *g_;
    const Overlay *o_;
    std::vector<BackwardGraph::Item> core_items_;
    std::vector<double> slopes_;
};

} // namespace charge

#endif
