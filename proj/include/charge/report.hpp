#ifndef CHARGE_REPORT_HPP
#define CHARGE_REPORT_HPP

#include "charge/grid_dp.hpp"
#include "charge/itinerary.hpp"

#include <json.hpp>

#include <string>

namespace charge
{

inline constexpr const char *query_schema = "charge-query/1";
inline constexpr const char *rank_schema = "charge-rank/1";
inline constexpr const char *validate_schema = "charge-validate/1";
inline constexpr const char *preprocess_schema = "charge-preprocess/1";

// One query result as a JSON object; stop durations include the init time.
inline nlohmann::ordered_json query_json(std::size_t index, const QueryResult &r)
{
    nlohmann::ordered_json j;
    j["schema"] = query_schema;
    j["index"] = index;
    j["status"] = r.feasible() ? "ok" : "infeasible";
    if (r.feasible())
    {
        const auto &it = r.itinerary;
        j["trip_time_s"] = it.trip_time;
        j["drive_time_s"] = it.drive_time;
        j["charge_time_s"] = it.charge_time;
        auto stops = nlohmann::ordered_json::array();
        for (const auto &s : it.stops)
            stops.push_back({{"vertex", s.vertex},
                             {"arrival_soc_wh", s.arrival_soc},
                             {"depart_soc_wh", s.depart_soc},
                             {"duration_s", s.init_time + s.duration},
                             {"init_s", s.init_time}});
        j["stops"] = std::move(stops);
        j["path"] = it.path;
    }
    else
    {
        j["trip_time_s"] = nullptr;
        j["drive_time_s"] = nullptr;
        j["charge_time_s"] = nullptr;
        j["stops"] = nlohmann::ordered_json::array();
        j["path"] = nlohmann::ordered_json::array();
    }
    j["labels_settled"] = r.labels_settled;
    j["dominance_checks"] = r.dominance_checks;
    j["source_bound_s"] = r.source_bound;
    return j;
}

inline nlohmann::ordered_json validation_json(const std::string &name, const ValidationReport &rep)
{
    nlohmann::ordered_json j;
    j["instance"] = name;
    j["queries"] = rep.queries;
    j["feasible"] = rep.feasible;
    j["max_gap_s"] = rep.max_gap;
    auto issues = nlohmann::ordered_json::array();
    for (const auto &i : rep.issues)
        issues.push_back({{"query", i.query}, {"message", i.message}});
    j["issues"] = std::move(issues);
    j["ok"] = rep.ok();
    return j;
}

} // namespace charge

#endif
