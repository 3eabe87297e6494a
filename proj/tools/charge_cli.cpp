#include "charge/charge_query.hpp"
#include "charge/generator.hpp"
#include "charge/grid_dp.hpp"
#include "charge/instance_io.hpp"
#include "charge/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

using namespace charge;
namespace fs = std::filesystem;

namespace
{
enum exit_code
{
    exit_ok = 0,
    exit_infeasible = 1,
    exit_validation = 2,
    exit_usage = 3
};

struct usage_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct Options
{
    std::string instance;
    std::string overlay;
    std::string queries;
    std::string out;
    std::string mode = "exact";
    std::string potential = "pi";
    std::string scenario = "realistic";
    std::string instance_dir;
    double core_degree = 32;
    bool aggressive = false;
    std::uint64_t seed = 1;
    double soc = -1;
    double delta = 0;
    long source = -1;
    long target = -1;
    unsigned threads = 1;
    std::size_t vertices = 10000;
    double degree = 2.5;
    double station_fraction = 0.01;
    double roughness = 1;
    double capacity = 16000;
    bool small = false;
    std::size_t stations = 3;
    std::size_t query_count = 0;
    std::string query_out;
    std::size_t max_rank = 1 << 13;
    std::size_t per_rank = 100;
    bool omit_timing = false;
    std::size_t validate_queries = 10;
};

QueryMode parse_mode(const std::string &s)
{
    if (s == "exact")
        return QueryMode::exact;
    if (s == "heu-pi")
        return QueryMode::heu_pi;
    if (s == "heu-omega")
        return QueryMode::heu_omega;
    if (s == "heu-omega-aggr")
        return QueryMode::heu_omega_aggressive;
    throw usage_error("unknown mode " + s);
}

PotentialKind parse_potential(const std::string &s)
{
    if (s == "zero")
        return PotentialKind::zero;
    if (s == "omega")
        return PotentialKind::omega;
    if (s == "pi")
        return PotentialKind::pi;
    if (s == "pi-demand")
        return PotentialKind::pi_on_demand;
    throw usage_error("unknown potential " + s);
}

Scenario parse_scenario(const std::string &s)
{
    if (const auto sc = scenario_from_name(s))
        return *sc;
    throw usage_error("unknown scenario " + s);
}

class Output
{
  public:
    explicit Output(const std::string &path)
    {
        if (path.empty())
            return;
        file_.open(path, std::ios::binary);
        if (!file_)
            throw std::runtime_error("cannot write " + path);
    }
    std::ostream &stream() { return file_.is_open() ? static_cast<std::ostream &>(file_) : std::cout; }

  private:
    std::ofstream file_;
};

Graph load_instance(const std::string &path) { return parse_instance(read_file(path)); }

// Runs `fn(i)` for i in [0, n) on `threads` workers.
template <class F> void fan_out(std::size_t n, unsigned threads, F &&fn)
{
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
    if (threads == 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (auto i = next++; i < n; i = next++)
            {
                try
                {
                    fn(i);
                }
                catch (...)
                {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    for (auto &t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}

// Answers queries with the overlay engine when one is given, plain search otherwise.
class Solver
{
  public:
    Solver(const Options &opt) : graph_(load_instance(opt.instance))
    {
        mode_ = parse_mode(opt.mode);
        potential_ = parse_potential(opt.potential);
        if (!opt.overlay.empty())
        {
            overlay_ = Overlay::deserialize(read_file(opt.overlay));
            engine_.emplace(graph_, *overlay_);
        }
        else if (mode_ != QueryMode::exact)
            throw usage_error("heuristic modes need --overlay");
    }

    const Graph &graph() const { return graph_; }

    QueryResult solve(const Query &q) const
    {
        if (!engine_)
            return astar_query(graph_, q.source, q.target, q.soc, potential_);
        QueryPlan plan;
        plan.source = q.source;
        plan.target = q.target;
        plan.soc = q.soc;
        plan.potential = potential_;
        plan.mode = mode_;
        return engine_->query(plan);
    }

  private:
    Graph graph_;
    QueryMode mode_;
    PotentialKind potential_;
    std::optional<Overlay> overlay_;
    std::optional<ChargeEngine> engine_;
};

int cmd_generate(const Options &opt)
{
    if (opt.out.empty())
        throw usage_error("generate needs --out");
    Graph g;
    if (opt.small)
    {
        SmallInstanceConfig cfg;
        cfg.vertices = opt.vertices;
        cfg.stations = opt.stations;
        cfg.capacity = opt.capacity;
        cfg.seed = opt.seed;
        g = generate_small(cfg);
    }
    else
    {
        GeneratorConfig cfg;
        cfg.vertices = opt.vertices;
        cfg.average_degree = opt.degree;
        cfg.station_fraction = opt.station_fraction;
        cfg.roughness = opt.roughness;
        cfg.capacity = opt.capacity;
        cfg.scenario = parse_scenario(opt.scenario);
        cfg.seed = opt.seed;
        g = generate_synthetic(cfg);
    }
    write_file(opt.out, render_instance(g));
    if (opt.query_count > 0)
    {
        const auto path = opt.query_out.empty() ? fs::path(opt.out).replace_extension(".q").string() : opt.query_out;
        write_file(path, render_queries(random_queries(g, opt.seed + 1, opt.query_count, 0.1, 1.0)));
    }
    std::cout << "vertices " << g.vertex_count() << " arcs " << g.arc_count() << " stations " << g.stations().size()
              << '\n';
    return exit_ok;
}

int cmd_preprocess(const Options &opt)
{
    if (opt.out.empty())
        throw usage_error("preprocess needs --out");
    const auto g = load_instance(opt.instance);
    ContractionConfig cfg;
    cfg.core_degree = opt.core_degree;
    cfg.aggressive = opt.aggressive;
    const auto start = std::chrono::steady_clock::now();
    const auto o = ch_preprocess(g, cfg);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_file(opt.out, o.serialize());
    nlohmann::ordered_json j;
    j["schema"] = preprocess_schema;
    j["core_vertices"] = o.core_vertices().size();
    j["core_share"] = static_cast<double>(o.core_vertices().size()) / static_cast<double>(g.vertex_count());
    j["core_arcs"] = o.core_arc_count();
    j["core_average_degree"] = o.core_average_degree();
    j["shortcuts"] = o.shortcut_count();
    j["aggressive"] = o.aggressive();
    j["elapsed_s"] = elapsed;
    std::cout << j.dump() << '\n';
    return exit_ok;
}

std::vector<Query> collect_queries(const Options &opt, const Graph &g)
{
    if (!opt.queries.empty())
        return parse_queries(read_file(opt.queries), g.vertex_count(), g.capacity());
    if (opt.source < 0 || opt.target < 0)
        throw usage_error("query needs --queries or --source and --target");
    const double soc = opt.soc < 0 ? g.capacity() : opt.soc;
    if (soc > g.capacity())
        throw usage_error("--soc exceeds capacity");
    if (static_cast<std::size_t>(opt.source) >= g.vertex_count() ||
        static_cast<std::size_t>(opt.target) >= g.vertex_count())
        throw usage_error("query vertex out of range");
    return {{static_cast<vertex_id>(opt.source), static_cast<vertex_id>(opt.target), soc}};
}

int cmd_query(const Options &opt)
{
    const Solver solver(opt);
    const auto queries = collect_queries(opt, solver.graph());
    std::vector<QueryResult> results(queries.size());
    fan_out(queries.size(), opt.threads, [&](std::size_t i) { results[i] = solver.solve(queries[i]); });
    Output out(opt.out);
    bool any = queries.empty();
    for (std::size_t i = 0; i < results.size(); ++i)
    {
        any |= results[i].feasible();
        out.stream() << query_json(i, results[i]).dump() << '\n';
    }
    return any ? exit_ok : exit_infeasible;
}

int cmd_rank(const Options &opt)
{
    const Solver solver(opt);
    const auto &g = solver.graph();
    const double soc = opt.soc < 0 ? g.capacity() : opt.soc;
    const auto queries = generate_rank_queries(g, opt.seed, opt.max_rank, opt.per_rank, soc);
    std::vector<QueryResult> results(queries.size());
    std::vector<double> runtime(queries.size());
    fan_out(queries.size(), opt.threads, [&](std::size_t i) {
        const auto start = std::chrono::steady_clock::now();
        results[i] = solver.solve(queries[i].query);
        runtime[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    });
    const auto median = [](std::vector<double> v) {
        if (v.empty())
            return 0.0;
        std::sort(v.begin(), v.end());
        const auto n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    Output out(opt.out);
    auto &os = out.stream();
    os << "# schema " << rank_schema << '\n';
    os << "rank,queries,feasible,median_runtime_ms,mean_drive_time_s,mean_charge_time_s,median_labels_settled\n";
    for (std::size_t i = 0; i < queries.size();)
    {
        std::size_t j = i;
        std::vector<double> times, labels;
        double drive = 0, charge_time = 0;
        std::size_t feasible = 0;
        for (; j < queries.size() && queries[j].rank == queries[i].rank; ++j)
        {
            times.push_back(runtime[j]);
            labels.push_back(static_cast<double>(results[j].labels_settled));
            if (!results[j].feasible())
                continue;
            ++feasible;
            drive += results[j].itinerary.drive_time;
            charge_time += results[j].itinerary.charge_time;
        }
        const double f = feasible ? static_cast<double>(feasible) : 1.0;
        os << queries[i].rank << ',' << j - i << ',' << feasible << ',';
        if (opt.omit_timing)
            os << "NA";
        else
            os << format_decimal(median(times));
        os << ',' << format_decimal(drive / f) << ',' << format_decimal(charge_time / f) << ','
           << format_decimal(median(labels)) << '\n';
        i = j;
    }
    return exit_ok;
}

int cmd_validate(const Options &opt)
{
    if (opt.instance_dir.empty())
        throw usage_error("validate needs --instance-dir");
    if (!fs::is_directory(opt.instance_dir))
        throw std::runtime_error("not a directory: " + opt.instance_dir);
    std::vector<fs::path> files;
    for (const auto &e : fs::directory_iterator(opt.instance_dir))
        if (e.is_regular_file() && e.path().extension() == ".ev")
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
        throw std::runtime_error("no .ev instances in " + opt.instance_dir);

    nlohmann::ordered_json report;
    report["schema"] = validate_schema;
    auto list = nlohmann::ordered_json::array();
    bool ok = true;
    for (const auto &path : files)
    {
        const auto name = path.filename().string();
        try
        {
            const auto g = load_instance(path.string());
            auto qpath = path;
            qpath.replace_extension(".q");
            const auto qs = fs::exists(qpath)
                                ? parse_queries(read_file(qpath.string()), g.vertex_count(), g.capacity())
                                : random_queries(g, opt.seed, opt.validate_queries, 0.0, 1.0);
            std::vector<GridQuery> grid;
            for (const auto &q : qs)
                grid.push_back({q.source, q.target, q.soc});
            const double delta = opt.delta > 0 ? opt.delta : g.capacity() / 400;
            const auto rep = validate_instance(g, grid, delta);
            ok &= rep.ok();
            list.push_back(validation_json(name, rep));
            std::cerr << name << ": " << rep.queries << " queries, " << rep.issues.size() << " issues\n";
            for (const auto &i : rep.issues)
                std::cerr << "  query " << i.query << ": " << i.message << '\n';
        }
        catch (const std::exception &e)
        {
            ok = false;
            list.push_back({{"instance", name}, {"error", e.what()}, {"ok", false}});
            std::cerr << name << ": " << e.what() << '\n';
        }
    }
    report["instances"] = std::move(list);
    report["ok"] = ok;
    Output out(opt.out);
    out.stream() << report.dump(2) << '\n';
    return ok ? exit_ok : exit_validation;
}
} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Electric vehicle routing with charging stops"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    Options opt;

    const auto engine_flags = [&](CLI::App *c) {
        c->add_option("--instance", opt.instance, "instance file")->required()->check(CLI::ExistingFile);
        c->add_option("--overlay", opt.overlay, "overlay file from preprocess")->check(CLI::ExistingFile);
        c->add_option("--mode", opt.mode, "exact|heu-pi|heu-omega|heu-omega-aggr")
            ->check(CLI::IsMember({"exact", "heu-pi", "heu-omega", "heu-omega-aggr"}));
        c->add_option("--potential", opt.potential, "zero|omega|pi|pi-demand")
            ->check(CLI::IsMember({"zero", "omega", "pi", "pi-demand"}));
        c->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
        c->add_option("--out", opt.out, "output file (default stdout)");
    };

    auto *gen = app.add_subcommand("generate", "write a synthetic instance");
    gen->add_option("--out", opt.out, "instance file")->required();
    gen->add_option("--vertices", opt.vertices, "vertex count")->check(CLI::Range(std::size_t{2}, std::size_t{1} << 26));
    gen->add_option("--degree", opt.degree, "arcs per vertex")->check(CLI::PositiveNumber);
    gen->add_option("--station-fraction", opt.station_fraction)->check(CLI::Range(0.0, 1.0));
    gen->add_option("--roughness", opt.roughness)->check(CLI::NonNegativeNumber);
    gen->add_option("--capacity", opt.capacity, "battery capacity in Wh")->check(CLI::PositiveNumber);
    gen->add_option("--scenario", opt.scenario, "bss|mixed|realistic")
        ->check(CLI::IsMember({"bss", "mixed", "realistic"}));
    gen->add_option("--seed", opt.seed);
    gen->add_flag("--small", opt.small, "small oracle-sized instance with random concave curves");
    gen->add_option("--stations", opt.stations, "station count for --small");
    gen->add_option("--queries", opt.query_count, "also write this many random queries");
    gen->add_option("--query-out", opt.query_out, "query file (default: instance with .q)");

    auto *pre = app.add_subcommand("preprocess", "build and write an overlay");
    pre->add_option("--instance", opt.instance)->required()->check(CLI::ExistingFile);
    pre->add_option("--core-degree", opt.core_degree, "stop when the core degree exceeds this")
        ->check(CLI::PositiveNumber);
    pre->add_flag("--aggressive", opt.aggressive, "keep one omega-optimal shortcut per vertex pair");
    pre->add_option("--out", opt.out, "overlay file")->required();

    auto *query = app.add_subcommand("query", "answer queries as JSON lines");
    engine_flags(query);
    query->add_option("--queries", opt.queries, "query file")->check(CLI::ExistingFile);
    query->add_option("--source", opt.source);
    query->add_option("--target", opt.target);
    query->add_option("--soc", opt.soc, "initial SoC in Wh (default: full)")->check(CLI::NonNegativeNumber);

    auto *rank = app.add_subcommand("rank", "rank plot data as CSV");
    engine_flags(rank);
    rank->add_option("--seed", opt.seed);
    rank->add_option("--max-rank", opt.max_rank)->check(CLI::PositiveNumber);
    rank->add_option("--per-rank", opt.per_rank)->check(CLI::PositiveNumber);
    rank->add_option("--soc", opt.soc, "initial SoC in Wh (default: full)")->check(CLI::NonNegativeNumber);
    rank->add_flag("--omit-timing", opt.omit_timing, "write NA for runtimes so reruns are byte-identical");

    auto *val = app.add_subcommand("validate", "compare exact search with the grid program");
    val->add_option("--instance-dir", opt.instance_dir)->required();
    val->add_option("--delta", opt.delta, "SoC grid step in Wh (default: capacity/400)")->check(CLI::PositiveNumber);
    val->add_option("--seed", opt.seed);
    val->add_option("--queries-per-instance", opt.validate_queries);
    val->add_option("--out", opt.out);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_usage;
    }

    for (const auto *sub : app.get_subcommands())
        std::cerr << "# " << sub->get_name() << " config\n" << sub->config_to_str(true, false);
    try
    {
        if (*gen)
            return cmd_generate(opt);
        if (*pre)
            return cmd_preprocess(opt);
        if (*query)
            return cmd_query(opt);
        if (*rank)
            return cmd_rank(opt);
        return cmd_validate(opt);
    }
    catch (const usage_error &e)
    {
        std::cerr << "usage error: " << e.what() << '\n';
    }
    catch (const parse_error &e)
    {
        std::cerr << "parse error: " << e.what() << '\n';
    }
    catch (const validation_error &e)
    {
        std::cerr << "invalid input: " << e.what() << '\n';
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
    }
    return exit_usage;
}
