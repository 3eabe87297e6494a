#ifndef CHARGE_GRAPH_HPP
#define CHARGE_GRAPH_HPP

#include "charge/charging_function.hpp"
#include "charge/common.hpp"
#include "charge/soc_profile.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace charge
{

enum class StationType
{
    swap,
    super,
    kw44,
    kw22,
    kw11
};

struct Arc
{
    vertex_id tail;
    vertex_id head;
    double drive_time;
    double consumption;

    friend bool operator==(const Arc &, const Arc &) = default;
};

struct Station
{
    vertex_id vertex;
    ChargingFunction function;
    std::optional<StationType> type;

    friend bool operator==(const Station &, const Station &) = default;
};

struct OutArc
{
    vertex_id head;
    double drive_time;
    double consumption;
    SocProfile profile;
    std::uint32_t arc;
};

struct InArc
{
    vertex_id tail;
    double drive_time;
    double consumption;
    std::uint32_t arc;
};

// Immutable road graph with charging stations. Arcs are kept sorted by
// (tail, head, drive time, consumption) so iteration order is reproducible.
class Graph
{
  public:
    Graph() = default;

    Graph(std::size_t n, std::vector<Arc> arcs, std::vector<Station> stations, double capacity)
        : n_(n), capacity_(capacity), arcs_(std::move(arcs)), stations_(std::move(stations))
    {
        if (!(capacity_ > 0))
            throw validation_error("battery capacity must be positive");
        std::sort(arcs_.begin(), arcs_.end(), [](const Arc &a, const Arc &b) {
            return std::tie(a.tail, a.head, a.drive_time, a.consumption) <
                   std::tie(b.tail, b.head, b.drive_time, b.consumption);
        });
        for (std::size_t i = 0; i < arcs_.size(); ++i)
        {
            const auto &a = arcs_[i];
            if (a.tail >= n_ || a.head >= n_)
                throw validation_error("arc " + std::to_string(i) + " references unknown vertex");
            if (!(a.drive_time > 0))
                throw validation_error("arc " + std::to_string(a.tail) + "->" + std::to_string(a.head) +
                                       " has nonpositive drive time");
            if (!std::isfinite(a.consumption) || std::abs(a.consumption) > capacity_)
                throw validation_error("arc " + std::to_string(a.tail) + "->" + std::to_string(a.head) +
                                       " has consumption outside [-M, M]");
        }
        std::sort(stations_.begin(), stations_.end(),
                  [](const Station &a, const Station &b) { return a.vertex < b.vertex; });
        station_index_.assign(n_, -1);
        for (std::size_t i = 0; i < stations_.size(); ++i)
        {
            const auto v = stations_[i].vertex;
            if (v >= n_)
                throw validation_error("station at unknown vertex " + std::to_string(v));
            if (station_index_[v] >= 0)
                throw validation_error("duplicate station at vertex " + std::to_string(v));
            station_index_[v] = static_cast<int>(i);
        }
        build_adjacency();
    }

    std::size_t vertex_count() const { return n_; }
    std::size_t arc_count() const { return arcs_.size(); }
    double capacity() const { return capacity_; }
    const std::vector<Arc> &arcs() const { return arcs_; }
    const std::vector<Station> &stations() const { return stations_; }

    std::span<const OutArc> out_arcs(vertex_id v) const
    {
        return {out_.data() + out_begin_[v], out_.data() + out_begin_[v + 1]};
    }
    std::span<const InArc> in_arcs(vertex_id v) const
    {
        return {in_.data() + in_begin_[v], in_.data() + in_begin_[v + 1]};
    }

    bool is_station(vertex_id v) const { return station_index_[v] >= 0; }
    int station_index(vertex_id v) const { return station_index_[v]; }
    const ChargingFunction &charging(vertex_id v) const { return stations_[station_index_[v]].function; }

    // Largest charging rate in the network, used by the omega weights.
    double max_charging_slope() const
    {
        double r = 0;
        for (const auto &s : stations_)
            r = std::max(r, s.function.max_slope());
        return r;
    }

    friend bool operator==(const Graph &a, const Graph &b)
    {
        return a.n_ == b.n_ && a.capacity_ == b.capacity_ && a.arcs_ == b.arcs_ && a.stations_ == b.stations_;
    }

  private:
    void build_adjacency()
    {
        out_begin_.assign(n_ + 1, 0);
        in_begin_.assign(n_ + 1, 0);
        for (const auto &a : arcs_)
        {
            ++out_begin_[a.tail + 1];
            ++in_begin_[a.head + 1];
        }
        for (std::size_t v = 0; v < n_; ++v)
        {
            out_begin_[v + 1] += out_begin_[v];
            in_begin_[v + 1] += in_begin_[v];
        }
        out_.resize(arcs_.size());
        in_.resize(arcs_.size());
        auto out_pos = out_begin_;
        auto in_pos = in_begin_;
        for (std::uint32_t i = 0; i < arcs_.size(); ++i)
        {
            const auto &a = arcs_[i];
            out_[out_pos[a.tail]++] = {a.head, a.drive_time, a.consumption,
                                       SocProfile::from_consumption(a.consumption, capacity_), i};
            in_[in_pos[a.head]++] = {a.tail, a.drive_time, a.consumption, i};
        }
    }

    std::size_t n_ = 0;
    double capacity_ = 1;
    std::vector<Arc> arcs_;
    std::vector<Station> stations_;
    std::vector<int> station_index_;
    std::vector<std::size_t> out_begin_{0};
    std::vector<std::size_t> in_begin_{0};
    std::vector<OutArc> out_;
    std::vector<InArc> in_;
};

} // namespace charge

#endif
