#include "linksched/cli.hpp"

#include "linksched/errors.hpp"
#include "linksched/harness.hpp"
#include "linksched/io.hpp"
#include "linksched/prob.hpp"
#include "linksched/sched.hpp"
#include "linksched/sim.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace linksched {

namespace {

struct MacFlags
{
    std::optional<std::int64_t> slot_us;
    std::optional<std::int64_t> sifs_us;
    std::optional<int> aifsn;
    std::optional<int> cw_min;

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--slot-us", slot_us, "Slot time in microseconds (default 13)");
        cmd->add_option("--sifs-us", sifs_us, "SIFS in microseconds (default 32)");
        cmd->add_option("--aifsn", aifsn, "AIFS number, at least 2");
        cmd->add_option("--cw-min", cw_min, "Backoff counters are drawn from [0, cw-min]");
    }

    MacTiming apply(MacTiming mac) const
    {
        if (slot_us)
            mac.slot_time = Micros{*slot_us};
        if (sifs_us)
            mac.sifs_time = Micros{*sifs_us};
        if (aifsn)
            mac.aifsn = *aifsn;
        if (cw_min)
            mac.cw_min = *cw_min;
        mac.validate();
        return mac;
    }
};

void add_format(CLI::App* cmd, std::string& format)
{
    cmd->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"text", "csv", "json"}))
        ->capture_default_str();
}

sched::Schedule make_schedule(const std::string& algorithm, const sched::SearchSpace& space, std::uint64_t seed,
                              std::uint64_t budget)
{
    if (algorithm == "tsgs")
        return sched::tsgs_schedule(space);
    if (algorithm == "exhaustive")
        return sched::exhaustive_schedule(space, budget);
    return sched::random_schedule(space, seed);
}

const std::vector<std::string> algorithms{"tsgs", "exhaustive", "random"};

struct ProbArgs
{
    std::uint32_t w = 16;
    std::uint32_t n_max = 15;
    unsigned digits = 4;
    std::string format = "text";
};

void cmd_prob(const ProbArgs& a, std::ostream& out)
{
    const auto rows = prob::probability_table(a.w, a.n_max);
    if (a.format == "json")
        out << io::canonical(io::probability_table_to_json(rows, a.digits));
    else if (a.format == "csv")
        io::write_probability_csv(out, rows, a.digits);
    else
        io::write_probability_text(out, rows, a.digits);
}

struct ScheduleArgs
{
    std::string problem;
    std::string algorithm = "tsgs";
    std::uint64_t seed = 0;
    std::uint64_t budget = sched::default_exhaustive_budget;
    std::string format = "text";
    MacFlags mac;
};

void cmd_schedule(const ScheduleArgs& a, std::ostream& out)
{
    const auto doc = io::problem_from_json(io::load_json_file(a.problem));
    const MacTiming mac = a.mac.apply(doc.mac);
    const auto space = sched::build_search_space(doc.problem, mac);
    const auto schedule = make_schedule(a.algorithm, space, a.seed, a.budget);
    if (a.format == "json")
        out << io::canonical(io::schedule_to_json(schedule));
    else if (a.format == "csv")
        io::write_schedule_csv(out, doc.problem, space, schedule);
    else
        io::write_schedule_text(out, doc.problem, space, schedule);
}

struct SimulateArgs
{
    std::string problem;
    std::string schedule;
    std::string algorithm = "tsgs";
    std::uint64_t seed = 0;
    std::optional<std::int64_t> d_proc_us;
    std::string trace;
    std::string format = "text";
    MacFlags mac;
};

void cmd_simulate(const SimulateArgs& a, std::ostream& out)
{
    const auto doc = io::problem_from_json(io::load_json_file(a.problem));
    sim::SimConfig config;
    config.mac = a.mac.apply(doc.mac);
    config.seed = a.seed;
    if (a.d_proc_us)
        config.d_proc = Micros{*a.d_proc_us};
    else if (doc.d_proc)
        config.d_proc = *doc.d_proc;
    if (config.d_proc < Micros{0})
        throw InputError("--d-proc-us must be non-negative");
    config.record_trace = !a.trace.empty();

    sched::Schedule schedule;
    if (!a.schedule.empty())
    {
        schedule = io::schedule_from_json(io::load_json_file(a.schedule));
    }
    else
    {
        const auto space = sched::build_search_space(doc.problem, config.mac);
        schedule = make_schedule(a.algorithm, space, a.seed, sched::default_exhaustive_budget);
    }

    const auto report = sim::run_simulation(doc.problem, schedule, config);
    if (config.record_trace)
    {
        std::ostringstream trace;
        sim::write_trace_csv(trace, report.trace);
        io::write_file(a.trace, trace.str());
    }

    if (a.format == "json")
        out << io::canonical(io::report_to_json(report, doc.problem));
    else if (a.format == "csv")
        io::write_report_csv(out, report, doc.problem);
    else
        io::write_report_text(out, report, doc.problem);
}

struct SweepArgs
{
    std::string spec;
    std::string out_dir;
};

void write_sweep_summary(std::ostream& out, const harness::SweepResult& result, const harness::Comparison& cmp)
{
    out << std::left << std::setw(12) << "window_s" << std::setw(10) << "strategy" << std::setw(10) << "pdr"
        << std::setw(12) << "collision" << "mmp\n";
    out << std::fixed;
    for (const auto& c : result.cells)
        out << std::left << std::setw(12) << std::setprecision(6) << to_seconds(c.window) << std::setw(10)
            << harness::to_string(c.strategy) << std::setprecision(4) << std::setw(10) << c.pdr << std::setw(12)
            << c.collision_ratio << c.mmp_ratio << '\n';
    out << std::setprecision(4);
    for (const auto& a : result.averages)
        out << "average " << harness::to_string(a.strategy) << ": pdr " << a.average_pdr << "  collision "
            << a.average_collision_ratio << "  mmp " << a.average_mmp_ratio << '\n';
    out << "pdr delta (tsgs - random): " << cmp.pdr_delta << '\n';
    if (cmp.relative_collision_improvement)
        out << "relative collision improvement: " << *cmp.relative_collision_improvement << '\n';
    out.unsetf(std::ios::floatfield);
}

void cmd_sweep(const SweepArgs& a, std::ostream& out)
{
    const auto spec = io::sweep_spec_from_json(io::load_json_file(a.spec));
    const auto result = harness::run_sweep(spec);

    std::error_code ec;
    std::filesystem::create_directories(a.out_dir, ec);
    if (ec)
        throw DomainError(a.out_dir + ": cannot create directory (" + ec.message() + ")");
    const std::filesystem::path dir(a.out_dir);

    io::write_file(dir / "sweep.json", io::canonical(io::sweep_result_to_json(result)));
    std::ostringstream csv;
    io::write_sweep_csv(csv, result);
    io::write_file(dir / "sweep.csv", csv.str());

    const bool both = result.averages_for(harness::Strategy::tsgs) && result.averages_for(harness::Strategy::random);
    std::optional<harness::Comparison> cmp;
    if (both)
    {
        cmp = harness::compare_strategies(result);
        io::write_file(dir / "comparison.json", io::canonical(io::comparison_to_json(*cmp)));
        std::ostringstream ccsv;
        io::write_comparison_csv(ccsv, *cmp);
        io::write_file(dir / "comparison.csv", ccsv.str());
        write_sweep_summary(out, result, *cmp);
    }
    else
    {
        write_sweep_summary(out, result, harness::Comparison{});
    }
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Transmission scheduling and MAC simulation for contending links", "linksched"};
    app.require_subcommand(1);

    ProbArgs prob_args;
    auto* prob_cmd = app.add_subcommand("prob", "Collision probability table for n contenders");
    prob_cmd->add_option("--w", prob_args.w, "Number of backoff values")->required()->check(CLI::Range(1u, 1000000u));
    prob_cmd->add_option("--n-max", prob_args.n_max, "Largest contender count")->required()->check(CLI::Range(0u, 1000000u));
    prob_cmd->add_option("--digits", prob_args.digits, "Decimal places")->capture_default_str();
    add_format(prob_cmd, prob_args.format);

    ScheduleArgs sched_args;
    auto* sched_cmd = app.add_subcommand("schedule", "Compute start offsets for a problem file");
    sched_cmd->add_option("--problem", sched_args.problem, "Problem JSON file")->required();
    sched_cmd->add_option("--algorithm", sched_args.algorithm, "Search algorithm")
        ->check(CLI::IsMember(algorithms))
        ->capture_default_str();
    sched_cmd->add_option("--seed", sched_args.seed, "Seed for the random algorithm")->capture_default_str();
    sched_cmd->add_option("--budget", sched_args.budget, "Candidate tuple budget for exhaustive search")
        ->capture_default_str();
    add_format(sched_cmd, sched_args.format);
    sched_args.mac.attach(sched_cmd);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Run one simulation of a scheduled problem");
    sim_cmd->add_option("--problem", sim_args.problem, "Problem JSON file")->required();
    auto* sched_file = sim_cmd->add_option("--schedule", sim_args.schedule, "Schedule JSON file");
    sim_cmd->add_option("--algorithm", sim_args.algorithm, "Schedule inline with this algorithm")
        ->check(CLI::IsMember(algorithms))
        ->excludes(sched_file)
        ->capture_default_str();
    sim_cmd->add_option("--seed", sim_args.seed, "Seed for backoff draws and the random algorithm")
        ->capture_default_str();
    sim_cmd->add_option("--d-proc-us", sim_args.d_proc_us, "Receiver processing time in microseconds (default 23)");
    sim_cmd->add_option("--trace", sim_args.trace, "Write the event trace CSV to this path");
    add_format(sim_cmd, sim_args.format);
    sim_args.mac.attach(sim_cmd);

    SweepArgs sweep_args;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a window sweep comparing tsgs with random schedules");
    sweep_cmd->add_option("--spec", sweep_args.spec, "Sweep spec JSON file")->required();
    sweep_cmd->add_option("--out", sweep_args.out_dir, "Output directory")->required();

    std::vector<const char*> argv{"linksched"};
    for (const auto& a : args)
        argv.push_back(a.c_str());

    try
    {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::CallForAllHelp& e)
    {
        return app.exit(e, out, err);
    }
    catch (const CLI::ParseError& e)
    {
        err << "error: " << e.what() << "\nRun with --help for usage.\n";
        return 2;
    }

    try
    {
        if (prob_cmd->parsed())
            cmd_prob(prob_args, out);
        else if (sched_cmd->parsed())
            cmd_schedule(sched_args, out);
        else if (sim_cmd->parsed())
            cmd_simulate(sim_args, out);
        else if (sweep_cmd->parsed())
            cmd_sweep(sweep_args, out);
    }
    catch (const InputError& e)
    {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const DomainError& e)
    {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    catch (const std::invalid_argument& e)
    {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const nlohmann::json::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace linksched
