#ifndef CHARGE_OVERLAY_HPP
#define CHARGE_OVERLAY_HPP

#include "charge/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

namespace charge
{

inline constexpr std::uint32_t no_edge = std::numeric_limits<std::uint32_t>::max();
inline constexpr std::uint32_t core_rank = std::numeric_limits<std::uint32_t>::max();

struct OverlayEdge
{
    vertex_id tail;
    vertex_id head;
    double drive_time;
    SocProfile profile;
    std::uint32_t child1 = no_edge;
    std::uint32_t child2 = no_edge;
    std::uint32_t base_arc = no_edge; // original arc id, or no_edge for shortcuts

    bool is_shortcut() const { return base_arc == no_edge; }

    friend bool operator==(const OverlayEdge &, const OverlayEdge &) = default;
};

struct ContractionConfig
{
    double core_degree = 32;
    bool aggressive = false;
    std::size_t label_cap = 10;
    std::size_t hop_limit = 20;
    std::size_t settle_limit = 1000; // per witness search
};

namespace detail
{
class Contractor;
}

// omega weight of an edge; falls back to drive time without stations.
inline double omega_of(double drive_time, double cost, double max_slope)
{
    return max_slope > 0 ? drive_time + cost / max_slope : drive_time;
}

// Partial contraction hierarchy: contracted vertices keep their upward and
// downward edges, the uncontracted core keeps its own edge set.
class Overlay
{
  public:
    Overlay() = default;

    std::size_t vertex_count() const { return rank_.size(); }
    std::size_t graph_arc_count() const { return graph_arcs_; }
    std::size_t graph_station_count() const { return graph_stations_; }
    double capacity() const { return capacity_; }
    double max_slope() const { return max_slope_; }
    bool aggressive() const { return aggressive_; }
    double core_degree_threshold() const { return core_degree_; }

    std::uint32_t rank(vertex_id v) const { return rank_[v]; }
    bool in_core(vertex_id v) const { return rank_[v] == core_rank; }
    const std::vector<vertex_id> &core_vertices() const { return core_; }
    std::uint32_t core_index(vertex_id v) const { return core_index_[v]; }

    const std::vector<OverlayEdge> &edges() const { return edges_; }
    const OverlayEdge &edge(std::uint32_t e) const { return edges_[e]; }
    double omega(std::uint32_t e) const { return omega_of(edges_[e].drive_time, edges_[e].profile.cost, max_slope_); }
    // True for the minimum-omega edge among its parallel edges.
    bool omega_best(std::uint32_t e) const { return omega_best_[e] != 0; }

    std::span<const std::uint32_t> up_out(vertex_id v) const { return slice(up_, up_begin_, v); }
    std::span<const std::uint32_t> down_in(vertex_id v) const { return slice(down_, down_begin_, v); }
    std::span<const std::uint32_t> core_out(vertex_id v) const { return slice(core_arcs_, core_begin_, v); }

    std::size_t core_arc_count() const { return core_arcs_.size(); }
    std::size_t shortcut_count() const
    {
        return static_cast<std::size_t>(
            std::count_if(edges_.begin(), edges_.end(), [](const OverlayEdge &e) { return e.is_shortcut(); }));
    }
    double core_average_degree() const
    {
        return core_.empty() ? 0.0 : static_cast<double>(core_arcs_.size()) / static_cast<double>(core_.size());
    }

    // Appends the original arcs of edge e in path order.
    void unpack(std::uint32_t e, std::vector<std::uint32_t> &out) const
    {
        std::vector<std::uint32_t> stack{e};
        while (!stack.empty())
        {
            const auto cur = stack.back();
            stack.pop_back();
            const auto &x = edges_[cur];
            if (!x.is_shortcut())
            {
                out.push_back(x.base_arc);
                continue;
            }
            stack.push_back(x.child2);
            stack.push_back(x.child1);
        }
    }

    bool matches(const Graph &g) const
    {
        return g.vertex_count() == vertex_count() && g.arc_count() == graph_arcs_ &&
               g.stations().size() == graph_stations_ && g.capacity() == capacity_;
    }

    friend bool operator==(const Overlay &, const Overlay &) = default;

    std::string serialize() const;
    static Overlay deserialize(const std::string &bytes);
    std::string dump() const;

  private:
    friend class detail::Contractor;

    static std::span<const std::uint32_t> slice(const std::vector<std::uint32_t> &ids,
                                                const std::vector<std::uint32_t> &begin, vertex_id v)
    {
        return {ids.data() + begin[v], ids.data() + begin[v + 1]};
    }

    void finalize(std::vector<std::vector<std::uint32_t>> up, std::vector<std::vector<std::uint32_t>> down,
                  std::vector<std::vector<std::uint32_t>> core);

    std::size_t graph_arcs_ = 0;
    std::size_t graph_stations_ = 0;
    double capacity_ = 1;
    double max_slope_ = 0;
    bool aggressive_ = false;
    double core_degree_ = 32;
    std::vector<std::uint32_t> rank_;
    std::vector<vertex_id> core_;
    std::vector<std::uint32_t> core_index_;
    std::vector<OverlayEdge> edges_;
    std::vector<char> omega_best_;
    std::vector<std::uint32_t> up_begin_{0}, up_;
    std::vector<std::uint32_t> down_begin_{0}, down_;
    std::vector<std::uint32_t> core_begin_{0}, core_arcs_;
};

namespace detail
{

inline bool edge_dominates(double da, const SocProfile &pa, double db, const SocProfile &pb, double capacity)
{
    return da <= db && profile_dominates(pa, pb, capacity);
}

class Contractor
{
  public:
    struct Candidate
    {
        vertex_id tail;
        vertex_id head;
        double drive_time;
        SocProfile profile;
        std::uint32_t in_edge;
        std::uint32_t out_edge;
    };

    Contractor(const Graph &g, const ContractionConfig &cfg)
        : g_(g), cfg_(cfg), n_(g.vertex_count()), M_(g.capacity()), max_slope_(g.max_charging_slope())
    {
        out_.assign(n_, {});
        in_.assign(n_, {});
        contracted_.assign(n_, 0);
        neighbors_done_.assign(n_, 0);
        depth_.assign(n_, 0);
        rank_.assign(n_, core_rank);
        for (std::uint32_t i = 0; i < g.arc_count(); ++i)
        {
            const auto &a = g.arcs()[i];
            if (a.tail == a.head)
                continue;
            insert({a.tail, a.head, a.drive_time, SocProfile::from_consumption(a.consumption, M_), no_edge, no_edge, i});
        }
        at_.assign(n_, {});
    }

    void run()
    {
        using entry = std::pair<std::int64_t, vertex_id>;
        std::priority_queue<entry, std::vector<entry>, std::greater<>> heap;
        for (vertex_id v = 0; v < n_; ++v)
            if (!g_.is_station(v))
                heap.push({priority(v, simulate(v)), v});
        remaining_ = n_;
        std::uint32_t next_rank = 0;
        while (!heap.empty() && core_degree() <= cfg_.core_degree)
        {
            const auto [old, v] = heap.top();
            heap.pop();
            if (contracted_[v])
                continue;
            auto shortcuts = simulate(v);
            const auto p = priority(v, shortcuts);
            if (!heap.empty() && p > heap.top().first)
            {
                heap.push({p, v});
                continue;
            }
            contract(v, std::move(shortcuts));
            rank_[v] = next_rank++;
        }
    }

    Overlay build();

    // Surviving shortcuts minus incident edges if v were contracted now.
    std::int64_t edge_difference(vertex_id v)
    {
        return static_cast<std::int64_t>(simulate(v).size()) -
               static_cast<std::int64_t>(in_[v].size() + out_[v].size());
    }

  private:
    double omega(const OverlayEdge &e) const { return omega_of(e.drive_time, e.profile.cost, max_slope_); }

    double core_degree() const
    {
        return remaining_ == 0 ? 0.0 : static_cast<double>(live_edges_) / static_cast<double>(remaining_);
    }

    std::int64_t priority(vertex_id v, const std::vector<Candidate> &shortcuts) const
    {
        const auto ed = static_cast<std::int64_t>(shortcuts.size()) -
                        static_cast<std::int64_t>(in_[v].size() + out_[v].size());
        return 64 * ed + neighbors_done_[v] + depth_[v];
    }

    static void erase_id(std::vector<std::uint32_t> &list, std::uint32_t id)
    {
        list.erase(std::find(list.begin(), list.end(), id));
    }

    // Adds an edge between uncontracted vertices, pruning dominated parallels.
    void insert(const OverlayEdge &e)
    {
        auto &out = out_[e.tail];
        for (std::size_t i = 0; i < out.size();)
        {
            const auto &x = edges_[out[i]];
            if (x.head != e.head)
            {
                ++i;
                continue;
            }
            const bool keep_old = cfg_.aggressive ? omega(x) <= omega(e)
                                                  : edge_dominates(x.drive_time, x.profile, e.drive_time,
                                                                   e.profile, M_);
            if (keep_old)
                return;
            const bool drop_old = cfg_.aggressive ||
                                  edge_dominates(e.drive_time, e.profile, x.drive_time, x.profile, M_);
            if (drop_old)
            {
                erase_id(in_[e.head], out[i]);
                out.erase(out.begin() + static_cast<std::ptrdiff_t>(i));
                --live_edges_;
            }
            else
                ++i;
        }
        const auto id = static_cast<std::uint32_t>(edges_.size());
        edges_.push_back(e);
        out.push_back(id);
        in_[e.head].push_back(id);
        ++live_edges_;
    }

    std::vector<Candidate> simulate(vertex_id v)
    {
        std::vector<Candidate> cands;
        for (auto a : in_[v])
            for (auto b : out_[v])
            {
                const auto &ea = edges_[a];
                const auto &eb = edges_[b];
                if (ea.tail == eb.head)
                    continue;
                const auto p = link_profiles(ea.profile, eb.profile);
                if (!p.feasible)
                    continue;
                cands.push_back({ea.tail, eb.head, ea.drive_time + eb.drive_time, p, a, b});
            }
        cands = prune_parallel(std::move(cands));
        std::vector<Candidate> needed;
        for (std::size_t i = 0; i < cands.size();)
        {
            std::size_t j = i;
            while (j < cands.size() && cands[j].tail == cands[i].tail)
                ++j;
            const auto keep = witness_search(v, std::span<const Candidate>(cands.data() + i, j - i));
            for (std::size_t k = i; k < j; ++k)
                if (keep[k - i])
                    needed.push_back(cands[k]);
            i = j;
        }
        return needed;
    }

    // Drops candidates dominated by another candidate for the same pair.
    std::vector<Candidate> prune_parallel(std::vector<Candidate> cands) const
    {
        std::stable_sort(cands.begin(), cands.end(), [](const Candidate &a, const Candidate &b) {
            return std::tie(a.tail, a.head, a.drive_time) < std::tie(b.tail, b.head, b.drive_time);
        });
        std::vector<Candidate> out;
        for (std::size_t i = 0; i < cands.size();)
        {
            std::size_t j = i;
            while (j < cands.size() && cands[j].tail == cands[i].tail && cands[j].head == cands[i].head)
                ++j;
            if (cfg_.aggressive)
            {
                std::size_t best = i;
                for (std::size_t k = i + 1; k < j; ++k)
                    if (omega_of(cands[k].drive_time, cands[k].profile.cost, max_slope_) <
                        omega_of(cands[best].drive_time, cands[best].profile.cost, max_slope_))
                        best = k;
                out.push_back(cands[best]);
            }
            else
            {
                for (std::size_t k = i; k < j; ++k)
                {
                    bool dominated = false;
                    for (std::size_t l = i; l < j && !dominated; ++l)
                    {
                        if (l == k)
                            continue;
                        const auto &a = cands[l];
                        const auto &b = cands[k];
                        if (!edge_dominates(a.drive_time, a.profile, b.drive_time, b.profile, M_))
                            continue;
                        // Equal pairs: the earlier one survives.
                        const bool mutual = edge_dominates(b.drive_time, b.profile, a.drive_time, a.profile, M_);
                        dominated = !mutual || l < k;
                    }
                    if (!dominated)
                        out.push_back(cands[k]);
                }
            }
            i = j;
        }
        return out;
    }

    struct WitnessLabel
    {
        double drive;
        SocProfile profile;
        vertex_id vertex;
        std::uint32_t hops;
    };

    // Bicriteria search from the common tail of `cands` avoiding `skip`.
    // Returns for each candidate whether no witness was found.
    std::vector<char> witness_search(vertex_id skip, std::span<const Candidate> cands)
    {
        std::vector<char> needed(cands.size(), 1);
        double limit = 0;
        for (const auto &c : cands)
            limit = std::max(limit, c.drive_time);
        std::size_t open = cands.size();

        labels_.clear();
        for (auto v : touched_)
            at_[v].clear();
        touched_.clear();

        struct Entry
        {
            double drive;
            std::uint32_t hops;
            std::uint32_t id;
            bool operator>(const Entry &o) const { return std::tie(drive, hops, id) > std::tie(o.drive, o.hops, o.id); }
        };
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
        const auto source = cands.front().tail;
        labels_.push_back({0, SocProfile::identity(M_), source, 0});
        heap.push({0, 0, 0});
        std::size_t settled = 0;
        while (!heap.empty() && open > 0 && settled < cfg_.settle_limit)
        {
            const auto id = heap.top().id;
            heap.pop();
            const auto lab = labels_[id];
            if (lab.drive > limit)
                break;
            auto &here = at_[lab.vertex];
            bool dominated = false;
            for (auto o : here)
                if (edge_dominates(labels_[o].drive, labels_[o].profile, lab.drive, lab.profile, M_))
                {
                    dominated = true;
                    break;
                }
            if (dominated)
                continue;
            if (here.size() >= cfg_.label_cap)
            {
                // Closest pair by drive time loses its later member.
                std::size_t best = here.size(); // index of the later member; here.size() means `lab`
                double gap = lab.drive - labels_[here.back()].drive;
                for (std::size_t i = 1; i < here.size(); ++i)
                {
                    const double d = labels_[here[i]].drive - labels_[here[i - 1]].drive;
                    if (d < gap)
                    {
                        gap = d;
                        best = i;
                    }
                }
                if (best == here.size())
                    continue;
                here.erase(here.begin() + static_cast<std::ptrdiff_t>(best));
            }
            if (here.empty())
                touched_.push_back(lab.vertex);
            here.push_back(id);
            ++settled;

            for (std::size_t i = 0; i < cands.size(); ++i)
                if (needed[i] && cands[i].head == lab.vertex &&
                    edge_dominates(lab.drive, lab.profile, cands[i].drive_time, cands[i].profile, M_))
                {
                    needed[i] = 0;
                    --open;
                }
            if (lab.hops >= cfg_.hop_limit)
                continue;
            for (auto e : out_[lab.vertex])
            {
                const auto &x = edges_[e];
                if (x.head == skip)
                    continue;
                const double d = lab.drive + x.drive_time;
                if (d > limit)
                    continue;
                const auto p = link_profiles(lab.profile, x.profile);
                if (!p.feasible)
                    continue;
                const auto nid = static_cast<std::uint32_t>(labels_.size());
                labels_.push_back({d, p, x.head, lab.hops + 1});
                heap.push({d, lab.hops + 1, nid});
            }
        }
        return needed;
    }

    void contract(vertex_id v, std::vector<Candidate> shortcuts)
    {
        for (auto a : in_[v])
        {
            const auto u = edges_[a].tail;
            erase_id(out_[u], a);
            ++neighbors_done_[u];
            depth_[u] = std::max(depth_[u], depth_[v] + 1);
        }
        for (auto b : out_[v])
        {
            const auto w = edges_[b].head;
            erase_id(in_[w], b);
            ++neighbors_done_[w];
            depth_[w] = std::max(depth_[w], depth_[v] + 1);
        }
        live_edges_ -= in_[v].size() + out_[v].size();
        contracted_[v] = 1;
        --remaining_;
        for (const auto &c : shortcuts)
            insert({c.tail, c.head, c.drive_time, c.profile, c.in_edge, c.out_edge, no_edge});
    }

    const Graph &g_;
    ContractionConfig cfg_;
    std::size_t n_;
    double M_;
    double max_slope_;
    std::vector<OverlayEdge> edges_;
    std::vector<std::vector<std::uint32_t>> out_, in_;
    std::vector<char> contracted_;
    std::vector<std::int64_t> neighbors_done_;
    std::vector<std::int64_t> depth_;
    std::vector<std::uint32_t> rank_;
    std::size_t live_edges_ = 0;
    std::size_t remaining_ = 0;
    std::vector<WitnessLabel> labels_;
    std::vector<std::vector<std::uint32_t>> at_;
    std::vector<vertex_id> touched_;
};

} // namespace detail

inline void Overlay::finalize(std::vector<std::vector<std::uint32_t>> up, std::vector<std::vector<std::uint32_t>> down,
                              std::vector<std::vector<std::uint32_t>> core)
{
    const auto n = rank_.size();
    // Keep only edges reachable from the final lists and renumber them.
    std::vector<char> used(edges_.size(), 0);
    std::vector<std::uint32_t> stack;
    for (const auto *lists : {&up, &down, &core})
        for (const auto &l : *lists)
            stack.insert(stack.end(), l.begin(), l.end());
    while (!stack.empty())
    {
        const auto e = stack.back();
        stack.pop_back();
        if (used[e])
            continue;
        used[e] = 1;
        if (edges_[e].is_shortcut())
        {
            stack.push_back(edges_[e].child1);
            stack.push_back(edges_[e].child2);
        }
    }
    std::vector<std::uint32_t> remap(edges_.size(), no_edge);
    std::vector<OverlayEdge> kept;
    for (std::uint32_t e = 0; e < edges_.size(); ++e)
        if (used[e])
        {
            remap[e] = static_cast<std::uint32_t>(kept.size());
            kept.push_back(edges_[e]);
        }
    for (auto &e : kept)
        if (e.is_shortcut())
        {
            e.child1 = remap[e.child1];
            e.child2 = remap[e.child2];
        }
    edges_ = std::move(kept);

    const auto build = [&](std::vector<std::vector<std::uint32_t>> &lists, bool by_tail, std::vector<std::uint32_t> &begin,
                           std::vector<std::uint32_t> &ids) {
        begin.assign(n + 1, 0);
        ids.clear();
        for (std::size_t v = 0; v < n; ++v)
        {
            auto &l = lists[v];
            for (auto &e : l)
                e = remap[e];
            std::sort(l.begin(), l.end(), [&](std::uint32_t a, std::uint32_t b) {
                const auto &x = edges_[a];
                const auto &y = edges_[b];
                const auto ex = by_tail ? x.tail : x.head;
                const auto ey = by_tail ? y.tail : y.head;
                return std::tie(ex, x.drive_time, a) < std::tie(ey, y.drive_time, b);
            });
            ids.insert(ids.end(), l.begin(), l.end());
            begin[v + 1] = static_cast<std::uint32_t>(ids.size());
        }
    };
    build(up, false, up_begin_, up_);
    build(down, true, down_begin_, down_);
    build(core, false, core_begin_, core_arcs_);

    omega_best_.assign(edges_.size(), 0);
    const auto mark = [&](const std::vector<std::uint32_t> &begin, const std::vector<std::uint32_t> &ids, bool by_tail) {
        for (std::size_t v = 0; v < n; ++v)
            for (auto i = begin[v]; i < begin[v + 1];)
            {
                auto j = i;
                const auto end_of = [&](std::uint32_t e) { return by_tail ? edges_[e].tail : edges_[e].head; };
                std::uint32_t best = ids[i];
                while (j < begin[v + 1] && end_of(ids[j]) == end_of(ids[i]))
                {
                    if (omega(ids[j]) < omega(best))
                        best = ids[j];
                    ++j;
                }
                omega_best_[best] = 1;
                i = j;
            }
    };
    mark(up_begin_, up_, false);
    mark(down_begin_, down_, true);
    mark(core_begin_, core_arcs_, false);

    core_.clear();
    core_index_.assign(n, no_edge);
    for (vertex_id v = 0; v < n; ++v)
        if (rank_[v] == core_rank)
        {
            core_index_[v] = static_cast<std::uint32_t>(core_.size());
            core_.push_back(v);
        }
}

inline Overlay detail::Contractor::build()
{
    Overlay o;
    o.graph_arcs_ = g_.arc_count();
    o.graph_stations_ = g_.stations().size();
    o.capacity_ = M_;
    o.max_slope_ = max_slope_;
    o.aggressive_ = cfg_.aggressive;
    o.core_degree_ = cfg_.core_degree;
    o.rank_ = rank_;
    o.edges_ = edges_;
    std::vector<std::vector<std::uint32_t>> up(n_), down(n_), core(n_);
    for (vertex_id v = 0; v < n_; ++v)
    {
        if (contracted_[v])
        {
            up[v] = out_[v];
            down[v] = in_[v];
        }
        else
            core[v] = out_[v];
    }
    o.finalize(std::move(up), std::move(down), std::move(core));
    return o;
}

// Contracts non-station vertices in priority order until the core's average
// degree exceeds the threshold.
inline Overlay ch_preprocess(const Graph &g, const ContractionConfig &cfg = {})
{
    detail::Contractor c(g, cfg);
    c.run();
    return c.build();
}

namespace detail
{
class ByteWriter
{
  public:
    void u8(std::uint8_t x) { out_.push_back(static_cast<char>(x)); }
    void u32(std::uint32_t x)
    {
        for (int i = 0; i < 4; ++i)
            u8(static_cast<std::uint8_t>(x >> (8 * i)));
    }
    void u64(std::uint64_t x)
    {
        for (int i = 0; i < 8; ++i)
            u8(static_cast<std::uint8_t>(x >> (8 * i)));
    }
    void f64(double x) { u64(std::bit_cast<std::uint64_t>(x)); }
    void raw(const char *s, std::size_t n) { out_.append(s, n); }
    std::string take() { return std::move(out_); }

  private:
    std::string out_;
};

class ByteReader
{
  public:
    explicit ByteReader(const std::string &s) : s_(s) {}
    std::uint8_t u8()
    {
        if (pos_ >= s_.size())
            throw std::runtime_error("overlay file truncated");
        return static_cast<std::uint8_t>(s_[pos_++]);
    }
    std::uint32_t u32()
    {
        std::uint32_t x = 0;
        for (int i = 0; i < 4; ++i)
            x |= static_cast<std::uint32_t>(u8()) << (8 * i);
        return x;
    }
    std::uint64_t u64()
    {
        std::uint64_t x = 0;
        for (int i = 0; i < 8; ++i)
            x |= static_cast<std::uint64_t>(u8()) << (8 * i);
        return x;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::size_t count(std::size_t limit)
    {
        const auto x = u64();
        if (x > limit)
            throw std::runtime_error("overlay file corrupt: count out of range");
        return static_cast<std::size_t>(x);
    }
    bool at_end() const { return pos_ == s_.size(); }
    std::size_t remaining() const { return s_.size() - pos_; }

  private:
    const std::string &s_;
    std::size_t pos_ = 0;
};

inline constexpr char overlay_magic[8] = {'C', 'H', 'A', 'R', 'G', 'E', 'O', 'V'};
inline constexpr std::uint32_t overlay_version = 1;
} // namespace detail

// Layout, all little endian: magic, version u32, vertex count u64, arc
// count u64, station count u64, capacity f64, max slope f64, aggressive
// u8, core degree f64, ranks u32[n], edge count u64, edges, then the three
// adjacency tables as (begin u32[n+1], count u64, ids u32[count]).
inline std::string Overlay::serialize() const
{
    detail::ByteWriter w;
    w.raw(detail::overlay_magic, sizeof detail::overlay_magic);
    w.u32(detail::overlay_version);
    w.u64(rank_.size());
    w.u64(graph_arcs_);
    w.u64(graph_stations_);
    w.f64(capacity_);
    w.f64(max_slope_);
    w.u8(aggressive_ ? 1 : 0);
    w.f64(core_degree_);
    for (auto r : rank_)
        w.u32(r);
    w.u64(edges_.size());
    for (const auto &e : edges_)
    {
        w.u32(e.tail);
        w.u32(e.head);
        w.f64(e.drive_time);
        w.f64(e.profile.in_min);
        w.f64(e.profile.cost);
        w.f64(e.profile.out_max);
        w.u8(e.profile.feasible ? 1 : 0);
        w.u32(e.child1);
        w.u32(e.child2);
        w.u32(e.base_arc);
    }
    for (const auto *t : {&up_begin_, &down_begin_, &core_begin_})
    {
        const auto &ids = t == &up_begin_ ? up_ : t == &down_begin_ ? down_ : core_arcs_;
        for (auto b : *t)
            w.u32(b);
        w.u64(ids.size());
        for (auto id : ids)
            w.u32(id);
    }
    return w.take();
}

inline Overlay Overlay::deserialize(const std::string &bytes)
{
    detail::ByteReader r(bytes);
    for (char c : detail::overlay_magic)
        if (static_cast<char>(r.u8()) != c)
            throw std::runtime_error("not an overlay file");
    if (r.u32() != detail::overlay_version)
        throw std::runtime_error("unsupported overlay version");
    Overlay o;
    const auto n = r.count(bytes.size());
    o.graph_arcs_ = r.u64();
    o.graph_stations_ = r.u64();
    o.capacity_ = r.f64();
    o.max_slope_ = r.f64();
    o.aggressive_ = r.u8() != 0;
    o.core_degree_ = r.f64();
    o.rank_.resize(n);
    for (auto &x : o.rank_)
        x = r.u32();
    const auto m = r.count(r.remaining());
    o.edges_.resize(m);
    for (std::uint32_t i = 0; i < m; ++i)
    {
        auto &e = o.edges_[i];
        e.tail = r.u32();
        e.head = r.u32();
        e.drive_time = r.f64();
        e.profile.in_min = r.f64();
        e.profile.cost = r.f64();
        e.profile.out_max = r.f64();
        e.profile.feasible = r.u8() != 0;
        e.child1 = r.u32();
        e.child2 = r.u32();
        e.base_arc = r.u32();
        if (e.tail >= n || e.head >= n)
            throw std::runtime_error("overlay file corrupt: edge endpoint");
        if (e.is_shortcut() && (e.child1 >= i || e.child2 >= i))
            throw std::runtime_error("overlay file corrupt: shortcut child");
        if (!e.is_shortcut() && e.base_arc >= o.graph_arcs_)
            throw std::runtime_error("overlay file corrupt: base arc");
    }
    std::vector<std::vector<std::uint32_t>> lists[3];
    for (auto &l : lists)
    {
        std::vector<std::uint32_t> begin(n + 1);
        for (auto &b : begin)
            b = r.u32();
        const auto count = r.count(r.remaining());
        std::vector<std::uint32_t> ids(count);
        for (auto &id : ids)
        {
            id = r.u32();
            if (id >= m)
                throw std::runtime_error("overlay file corrupt: edge id");
        }
        if (begin.front() != 0 || begin.back() != count || !std::is_sorted(begin.begin(), begin.end()))
            throw std::runtime_error("overlay file corrupt: adjacency offsets");
        l.assign(n, {});
        for (std::size_t v = 0; v < n; ++v)
            l[v].assign(ids.begin() + begin[v], ids.begin() + begin[v + 1]);
    }
    if (!r.at_end())
        throw std::runtime_error("overlay file has trailing bytes");
    // finalize() renumbers through reachability; ids are already compact,
    // so the result is the stored layout.
    o.finalize(std::move(lists[0]), std::move(lists[1]), std::move(lists[2]));
    return o;
}

inline std::string Overlay::dump() const
{
    std::ostringstream out;
    out.precision(17);
    out << "overlay vertices " << rank_.size() << " core " << core_.size() << " edges " << edges_.size()
        << " core_arcs " << core_arcs_.size() << " aggressive " << (aggressive_ ? 1 : 0) << '\n';
    for (vertex_id v = 0; v < rank_.size(); ++v)
    {
        out << "v " << v << ' ';
        if (rank_[v] == core_rank)
            out << "core " << core_index_[v];
        else
            out << "rank " << rank_[v];
        out << '\n';
    }
    for (std::uint32_t e = 0; e < edges_.size(); ++e)
    {
        const auto &x = edges_[e];
        out << "e " << e << ' ' << x.tail << ' ' << x.head << ' ' << x.drive_time << ' ' << x.profile.in_min << ' '
            << x.profile.cost << ' ' << x.profile.out_max << ' ';
        if (x.is_shortcut())
            out << "via " << x.child1 << ' ' << x.child2;
        else
            out << "arc " << x.base_arc;
        out << '\n';
    }
    const auto table = [&](const char *name, const std::vector<std::uint32_t> &begin,
                           const std::vector<std::uint32_t> &ids) {
        for (vertex_id v = 0; v < rank_.size(); ++v)
        {
            if (begin[v] == begin[v + 1])
                continue;
            out << name << ' ' << v;
            for (auto i = begin[v]; i < begin[v + 1]; ++i)
                out << ' ' << ids[i];
            out << '\n';
        }
    };
    table("up", up_begin_, up_);
    table("down", down_begin_, down_);
    table("core", core_begin_, core_arcs_);
    return out.str();
}

} // namespace charge

#endif
