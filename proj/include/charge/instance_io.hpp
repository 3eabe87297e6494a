#ifndef CHARGE_INSTANCE_IO_HPP
#define CHARGE_INSTANCE_IO_HPP

#include "charge/graph.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace charge
{

class parse_error : public std::runtime_error
{
  public:
    parse_error(std::size_t line, const std::string &what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

struct Query
{
    vertex_id source;
    vertex_id target;
    double soc;

    friend bool operator==(const Query &, const Query &) = default;
};

inline const char *station_type_name(StationType t)
{
    switch (t)
    {
    case StationType::swap:
        return "SWAP";
    case StationType::super:
        return "SUPER";
    case StationType::kw44:
        return "KW44";
    case StationType::kw22:
        return "KW22";
    case StationType::kw11:
        return "KW11";
    }
    return "?";
}

inline std::optional<StationType> station_type_from_name(const std::string &s)
{
    for (auto t : {StationType::swap, StationType::super, StationType::kw44, StationType::kw22, StationType::kw11})
        if (s == station_type_name(t))
            return t;
    return std::nullopt;
}

// Charging curves of the station library, scaled to the given capacity.
// Regular chargers use breakpoints at 0/80/85/90/95/100% with times read
// off the reference plot for an 85 kWh battery and scaled linearly.
inline ChargingFunction station_function(StationType type, double capacity)
{
    constexpr double reference_capacity = 85000;
    const double scale = 3600.0 * capacity / reference_capacity;
    const auto regular = [&](std::array<double, 5> hours) {
        std::vector<CurvePoint> pts{{0, 0}};
        const std::array<double, 5> share{0.80, 0.85, 0.90, 0.95, 1.00};
        for (std::size_t i = 0; i < 5; ++i)
            pts.push_back({hours[i] * scale, share[i] * capacity});
        return ChargingFunction::make_curve(pts, 60, capacity);
    };
    switch (type)
    {
    case StationType::swap:
        return ChargingFunction::make_swap(capacity, 180);
    case StationType::super:
        return ChargingFunction::make_curve({{0, 0}, {34 * 60, 0.8 * capacity}}, 60, capacity);
    case StationType::kw44:
        return regular({1.558, 1.670, 1.821, 2.045, 2.710});
    case StationType::kw22:
        return regular({3.116, 3.334, 3.642, 4.089, 5.414});
    case StationType::kw11:
        return regular({6.231, 6.677, 7.284, 8.178, 10.829});
    }
    throw validation_error("unknown station type");
}

enum class Scenario
{
    bss,
    mixed,
    realistic
};

inline std::optional<Scenario> scenario_from_name(const std::string &s)
{
    if (s == "bss")
        return Scenario::bss;
    if (s == "mixed")
        return Scenario::mixed;
    if (s == "realistic")
        return Scenario::realistic;
    return std::nullopt;
}

inline std::vector<std::pair<StationType, int>> scenario_shares(Scenario s)
{
    switch (s)
    {
    case Scenario::bss:
        return {{StationType::swap, 100}};
    case Scenario::mixed:
        return {{StationType::kw11, 30},
                {StationType::kw22, 30},
                {StationType::kw44, 20},
                {StationType::super, 10},
                {StationType::swap, 10}};
    case Scenario::realistic:
        return {{StationType::kw11, 50}, {StationType::kw22, 40}, {StationType::kw44, 10}};
    }
    return {};
}

// Type counts for k stations by largest remainder; ties go to the type listed first.
inline std::vector<std::pair<StationType, std::size_t>> scenario_counts(Scenario s, std::size_t k)
{
    const auto shares = scenario_shares(s);
    std::vector<std::pair<StationType, std::size_t>> out;
    std::vector<std::pair<std::size_t, std::size_t>> remainders; // (remainder, index)
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < shares.size(); ++i)
    {
        const std::size_t exact = k * static_cast<std::size_t>(shares[i].second);
        out.push_back({shares[i].first, exact / 100});
        assigned += exact / 100;
        remainders.push_back({exact % 100, i});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto &a, const auto &b) { return a.first > b.first; });
    for (std::size_t i = 0; assigned < k; ++i, ++assigned)
        ++out[remainders[i].second].second;
    return out;
}

// Replaces every station's function by a library curve of the scenario's mix.
inline std::vector<Station> assign_scenario(std::vector<Station> stations, Scenario s, std::uint64_t seed,
                                            double capacity)
{
    std::sort(stations.begin(), stations.end(), [](const Station &a, const Station &b) { return a.vertex < b.vertex; });
    std::vector<StationType> types;
    for (const auto &[type, count] : scenario_counts(s, stations.size()))
        types.insert(types.end(), count, type);
    std::mt19937_64 rng(seed);
    for (std::size_t i = types.size(); i > 1; --i)
        std::swap(types[i - 1], types[std::uniform_int_distribution<std::size_t>(0, i - 1)(rng)]);
    for (std::size_t i = 0; i < stations.size(); ++i)
    {
        stations[i].function = station_function(types[i], capacity);
        stations[i].type = types[i];
    }
    return stations;
}

inline std::string format_decimal(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    std::string s(buf);
    if (s == "-0.000000")
        s = "0.000000";
    return s;
}

// Text format:
//   ev <n> <m> <k> <capacity_wh>
//   a <tail> <head> <drive_s> <cons_wh>
//   s <vertex> <init_s> swap
//   s <vertex> <init_s> curve <p> <t1> <b1> ... <tp> <bp>
//   s <vertex> type <SWAP|SUPER|KW44|KW22|KW11>
// Blank lines and lines starting with '#' are ignored.
inline std::string render_instance(const Graph &g)
{
    std::ostringstream out;
    out << "ev " << g.vertex_count() << ' ' << g.arc_count() << ' ' << g.stations().size() << ' '
        << format_decimal(g.capacity()) << '\n';
    for (const auto &a : g.arcs())
        out << "a " << a.tail << ' ' << a.head << ' ' << format_decimal(a.drive_time) << ' '
            << format_decimal(a.consumption) << '\n';
    for (const auto &s : g.stations())
    {
        out << "s " << s.vertex << ' ';
        if (s.type)
            out << "type " << station_type_name(*s.type);
        else if (s.function.is_swap())
            out << format_decimal(s.function.init_time()) << " swap";
        else
        {
            out << format_decimal(s.function.init_time()) << " curve " << s.function.points().size();
            for (const auto &p : s.function.points())
                out << ' ' << format_decimal(p.time) << ' ' << format_decimal(p.soc);
        }
        out << '\n';
    }
    return out.str();
}

namespace detail
{
struct LineReader
{
    std::istringstream in;
    std::size_t line;

    template <class T> T next(const char *what)
    {
        T value;
        if (!(in >> value))
            throw parse_error(line, std::string("expected ") + what);
        return value;
    }

    double number(const char *what)
    {
        const auto token = next<std::string>(what);
        std::size_t used = 0;
        double x = 0;
        try
        {
            x = std::stod(token, &used);
        }
        catch (const std::exception &)
        {
            used = 0;
        }
        if (used != token.size() || !std::isfinite(x))
            throw parse_error(line, std::string("bad number for ") + what + ": '" + token + "'");
        return x;
    }

    vertex_id vertex(std::size_t n, const char *what)
    {
        const auto token = next<std::string>(what);
        if (token.empty() || token.find_first_not_of("0123456789") != std::string::npos || token.size() > 10)
            throw parse_error(line, std::string("bad vertex id for ") + what + ": '" + token + "'");
        const auto v = std::stoull(token);
        if (v >= n)
            throw parse_error(line, std::string(what) + " " + token + " out of range");
        return static_cast<vertex_id>(v);
    }

    void finish()
    {
        std::string extra;
        if (in >> extra)
            throw parse_error(line, "trailing token '" + extra + "'");
    }
};

template <class F> void for_each_line(const std::string &text, F &&fn)
{
    std::istringstream in(text);
    std::string raw;
    std::size_t number = 0;
    while (std::getline(in, raw))
    {
        ++number;
        const auto first = raw.find_first_not_of(" \t\r");
        if (first == std::string::npos || raw[first] == '#')
            continue;
        fn(LineReader{std::istringstream(raw), number});
    }
}
} // namespace detail

inline Graph parse_instance(const std::string &text)
{
    bool header = false;
    std::size_t n = 0, m = 0, k = 0;
    double capacity = 0;
    std::vector<Arc> arcs;
    std::vector<Station> stations;
    std::vector<char> has_station;
    detail::for_each_line(text, [&](detail::LineReader r) {
        const auto tag = r.next<std::string>("record type");
        if (!header)
        {
            if (tag != "ev")
                throw parse_error(r.line, "expected header 'ev <n> <m> <k> <capacity>'");
            n = r.next<std::size_t>("vertex count");
            m = r.next<std::size_t>("arc count");
            k = r.next<std::size_t>("station count");
            capacity = r.number("capacity");
            if (!(capacity > 0))
                throw parse_error(r.line, "capacity must be positive");
            r.finish();
            header = true;
            has_station.assign(n, 0);
            return;
        }
        if (tag == "a")
        {
            Arc a;
            a.tail = r.vertex(n, "tail");
            a.head = r.vertex(n, "head");
            a.drive_time = r.number("drive time");
            a.consumption = r.number("consumption");
            r.finish();
            if (!(a.drive_time > 0))
                throw parse_error(r.line, "arc " + std::to_string(a.tail) + "->" + std::to_string(a.head) +
                                              " has nonpositive drive time");
            if (std::abs(a.consumption) > capacity)
                throw parse_error(r.line, "arc " + std::to_string(a.tail) + "->" + std::to_string(a.head) +
                                              " consumption outside [-M, M]");
            arcs.push_back(a);
        }
        else if (tag == "s")
        {
            Station s;
            s.vertex = r.vertex(n, "station vertex");
            if (has_station[s.vertex])
                throw parse_error(r.line, "duplicate station at vertex " + std::to_string(s.vertex));
            has_station[s.vertex] = 1;
            const auto second = r.next<std::string>("init time or 'type'");
            try
            {
                if (second == "type")
                {
                    const auto name = r.next<std::string>("station type");
                    const auto type = station_type_from_name(name);
                    if (!type)
                        throw parse_error(r.line, "unknown station type '" + name + "'");
                    s.type = type;
                    s.function = station_function(*type, capacity);
                }
                else
                {
                    std::istringstream tmp(second);
                    detail::LineReader init_reader{std::move(tmp), r.line};
                    const double init = init_reader.number("init time");
                    if (init < 0)
                        throw parse_error(r.line, "negative init time");
                    const auto kind = r.next<std::string>("'swap' or 'curve'");
                    if (kind == "swap")
                        s.function = ChargingFunction::make_swap(capacity, init);
                    else if (kind == "curve")
                    {
                        const auto p = r.next<std::size_t>("breakpoint count");
                        if (p == 0)
                            throw parse_error(r.line, "curve needs at least one breakpoint");
                        std::vector<CurvePoint> pts;
                        for (std::size_t i = 0; i < p; ++i)
                        {
                            const double t = r.number("breakpoint time");
                            const double b = r.number("breakpoint SoC");
                            pts.push_back({t, b});
                        }
                        s.function = ChargingFunction::make_curve(std::move(pts), init, capacity);
                    }
                    else
                        throw parse_error(r.line, "unknown station kind '" + kind + "'");
                }
            }
            catch (const validation_error &e)
            {
                throw parse_error(r.line, "station " + std::to_string(s.vertex) + ": " + e.what());
            }
            r.finish();
            stations.push_back(std::move(s));
        }
        else
            throw parse_error(r.line, "unknown record type '" + tag + "'");
    });
    if (!header)
        throw parse_error(0, "missing header");
    if (arcs.size() != m)
        throw parse_error(0, "header declares " + std::to_string(m) + " arcs, found " + std::to_string(arcs.size()));
    if (stations.size() != k)
        throw parse_error(0, "header declares " + std::to_string(k) + " stations, found " +
                                 std::to_string(stations.size()));
    return Graph(n, std::move(arcs), std::move(stations), capacity);
}

inline std::string render_queries(const std::vector<Query> &qs)
{
    std::ostringstream out;
    for (const auto &q : qs)
        out << "q " << q.source << ' ' << q.target << ' ' << format_decimal(q.soc) << '\n';
    return out.str();
}

inline std::vector<Query> parse_queries(const std::string &text, std::size_t n, double capacity)
{
    std::vector<Query> out;
    detail::for_each_line(text, [&](detail::LineReader r) {
        const auto tag = r.next<std::string>("record type");
        if (tag != "q")
            throw parse_error(r.line, "expected 'q <s> <t> <soc>'");
        Query q;
        q.source = r.vertex(n, "source");
        q.target = r.vertex(n, "target");
        q.soc = r.number("initial SoC");
        if (q.soc < 0 || q.soc > capacity)
            throw parse_error(r.line, "initial SoC outside [0, M]");
        r.finish();
        out.push_back(q);
    });
    return out;
}

inline std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string &path, const std::string &content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << content;
}

} // namespace charge

#endif
