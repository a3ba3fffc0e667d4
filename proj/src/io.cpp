#include "linksched/io.hpp"

#include "linksched/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace linksched {

Micros seconds_to_micros(double seconds, std::string_view what)
{
    if (!std::isfinite(seconds))
        throw InputError(std::string(what) + ": not a finite number");
    const double us = seconds * 1e6;
    const double rounded = std::round(us);
    if (std::abs(us - rounded) > 1e-3 || std::abs(rounded) > 9.0e15)
        throw InputError(std::string(what) + ": " + std::to_string(seconds) +
                         " s is not a whole number of microseconds");
    return Micros{static_cast<std::int64_t>(rounded)};
}

} // namespace linksched

namespace linksched::io {

namespace {

std::string line_col(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    {
        if (text[i] == '\n')
        {
            ++line;
            col = 1;
        }
        else
        {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const Json& require(const Json& doc, const std::string& key, const std::string& where)
{
    if (!doc.is_object())
        throw InputError(where + ": expected an object");
    auto it = doc.find(key);
    if (it == doc.end())
        throw InputError(where + ": missing field '" + key + "'");
    return *it;
}

std::string field_path(const std::string& where, const std::string& key)
{
    return where.empty() ? key : where + "." + key;
}

template <typename T>
T number_at(const Json& doc, const std::string& key, const std::string& where)
{
    const Json& v = require(doc, key, where);
    const std::string path = field_path(where, key);
    if constexpr (std::is_integral_v<T>)
    {
        if (!v.is_number_integer())
            throw InputError(path + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>)
        {
            if (v.is_number_unsigned())
                return v.get<T>();
            if (v.get<std::int64_t>() < 0)
                throw InputError(path + ": expected a non-negative integer");
        }
        return v.get<T>();
    }
    else
    {
        if (!v.is_number())
            throw InputError(path + ": expected a number");
        return v.get<T>();
    }
}

template <typename T>
T number_or(const Json& doc, const std::string& key, const std::string& where, T fallback)
{
    return doc.contains(key) ? number_at<T>(doc, key, where) : fallback;
}

Micros seconds_at(const Json& doc, const std::string& key, const std::string& where)
{
    return seconds_to_micros(number_at<double>(doc, key, where), field_path(where, key));
}

Micros micros_at(const Json& doc, const std::string& key, const std::string& where)
{
    return Micros{number_at<std::int64_t>(doc, key, where)};
}

const Json& array_at(const Json& doc, const std::string& key, const std::string& where)
{
    const Json& v = require(doc, key, where);
    if (!v.is_array())
        throw InputError(field_path(where, key) + ": expected an array");
    return v;
}

std::string fixed(double v, int digits = 6)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string seconds_text(Micros t)
{
    return fixed(to_seconds(t), 6);
}

Json optional_number(const std::optional<double>& v)
{
    return v ? Json(*v) : Json(nullptr);
}

sched::ConnectionSpec connection_from_json(const Json& c, const std::string& where, bool with_deadline)
{
    sched::ConnectionSpec spec;
    spec.id = number_at<int>(c, "id", where);
    spec.sender = number_at<int>(c, "sender", where);
    spec.receiver = number_at<int>(c, "receiver", where);
    spec.packet_count = number_at<int>(c, "packet_count", where);
    spec.packet_airtime = micros_at(c, "packet_airtime_us", where);
    if (with_deadline)
        spec.deadline = seconds_at(c, "deadline_s", where);
    try
    {
        spec.validate();
    }
    catch (const InputError& e)
    {
        throw InputError(where + ": " + e.what());
    }
    return spec;
}

std::vector<sched::ConnectionSpec> connections_from_json(const Json& doc, bool with_deadline)
{
    const Json& list = array_at(doc, "connections", "");
    std::vector<sched::ConnectionSpec> out;
    for (std::size_t i = 0; i < list.size(); ++i)
        out.push_back(connection_from_json(list[i], "connections[" + std::to_string(i) + "]", with_deadline));
    return out;
}

} // namespace

Json parse_json_text(const std::string& text, const std::string& origin)
{
    try
    {
        return Json::parse(text);
    }
    catch (const Json::parse_error& e)
    {
        throw InputError(origin + ": JSON syntax error at " + line_col(text, e.byte == 0 ? 0 : e.byte - 1));
    }
}

Json load_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError(path.string() + ": cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_json_text(buf.str(), path.string());
}

MacTiming mac_from_json(const Json& doc, MacTiming defaults)
{
    if (!doc.contains("mac"))
        return defaults;
    const Json& m = doc.at("mac");
    MacTiming mac = defaults;
    mac.slot_time = Micros{number_or<std::int64_t>(m, "slot_us", "mac", defaults.slot_time.count())};
    mac.sifs_time = Micros{number_or<std::int64_t>(m, "sifs_us", "mac", defaults.sifs_time.count())};
    mac.aifsn = number_or<int>(m, "aifsn", "mac", defaults.aifsn);
    mac.cw_min = number_or<int>(m, "cw_min", "mac", defaults.cw_min);
    mac.validate();
    return mac;
}

ProblemDocument problem_from_json(const Json& doc)
{
    ProblemDocument out;
    auto& p = out.problem;
    p.epoch_start = seconds_at(doc, "epoch_start_s", "");
    p.step = seconds_at(doc, "delta_s", "");
    p.margin = doc.contains("tau_s") ? seconds_at(doc, "tau_s", "") : Micros{0};
    p.connections = connections_from_json(doc, true);
    p.validate();
    out.mac = mac_from_json(doc);
    if (doc.contains("d_proc_us"))
        out.d_proc = micros_at(doc, "d_proc_us", "");
    return out;
}

Json problem_to_json(const sched::ScheduleProblem& problem)
{
    Json conns = Json::array();
    for (const auto& c : problem.connections)
        conns.push_back({{"id", c.id},
                         {"sender", c.sender},
                         {"receiver", c.receiver},
                         {"packet_count", c.packet_count},
                         {"packet_airtime_us", c.packet_airtime.count()},
                         {"deadline_s", to_seconds(c.deadline)}});
    return {{"epoch_start_s", to_seconds(problem.epoch_start)},
            {"delta_s", to_seconds(problem.step)},
            {"tau_s", to_seconds(problem.margin)},
            {"connections", conns}};
}

Json schedule_to_json(const sched::Schedule& schedule)
{
    Json starts = Json::array();
    for (auto t : schedule.start_times)
        starts.push_back(to_seconds(t));
    return {{"start_times_s", starts}, {"cost_s", to_seconds(schedule.cost)}};
}

sched::Schedule schedule_from_json(const Json& doc)
{
    sched::Schedule out;
    const Json& starts = array_at(doc, "start_times_s", "");
    for (std::size_t i = 0; i < starts.size(); ++i)
    {
        const std::string where = "start_times_s[" + std::to_string(i) + "]";
        if (!starts[i].is_number())
            throw InputError(where + ": expected a number");
        out.start_times.push_back(seconds_to_micros(starts[i].get<double>(), where));
    }
    out.cost = doc.contains("cost_s") ? seconds_at(doc, "cost_s", "") : Micros{0};
    return out;
}

void write_schedule_csv(std::ostream& out, const sched::ScheduleProblem& problem, const sched::SearchSpace& space,
                        const sched::Schedule& schedule)
{
    out << "connection,start_s,end_s\n";
    for (std::size_t i = 0; i < schedule.start_times.size(); ++i)
    {
        const Micros start = problem.epoch_start + schedule.start_times[i];
        out << problem.connections[i].id << ',' << seconds_text(start) << ','
            << seconds_text(start + space.durations[i]) << '\n';
    }
}

void write_schedule_text(std::ostream& out, const sched::ScheduleProblem& problem, const sched::SearchSpace& space,
                         const sched::Schedule& schedule)
{
    out << std::left << std::setw(12) << "connection" << std::setw(14) << "offset_s" << std::setw(14) << "start_s"
        << std::setw(14) << "end_s" << "window_s\n";
    for (std::size_t i = 0; i < schedule.start_times.size(); ++i)
    {
        const Micros start = problem.epoch_start + schedule.start_times[i];
        out << std::left << std::setw(12) << problem.connections[i].id << std::setw(14)
            << seconds_text(schedule.start_times[i]) << std::setw(14) << seconds_text(start) << std::setw(14)
            << seconds_text(start + space.durations[i]) << seconds_text(space.windows[i]) << '\n';
    }
    out << "cost_s " << seconds_text(schedule.cost) << '\n';
}

Json report_to_json(const sim::SimReport& report, const sched::ScheduleProblem& problem)
{
    const auto checks = sim::completion_times(report, problem);
    Json rows = Json::array();
    for (std::size_t i = 0; i < report.connections.size(); ++i)
    {
        const auto& r = report.connections[i];
        rows.push_back({{"id", r.id},
                        {"sent", r.sent},
                        {"delivered", r.delivered},
                        {"collided", r.collided},
                        {"mmp_count", r.mmp_count},
                        {"mmp_lost", r.mmp_lost},
                        {"backoffs", r.backoffs},
                        {"completion_s", r.completion ? Json(to_seconds(*r.completion)) : Json(nullptr)},
                        {"met_deadline", checks[i].met_deadline}});
    }
    return {{"connections", rows},
            {"pdr", report.pdr()},
            {"collision_ratio", report.collision_ratio()},
            {"mmp_ratio", report.mmp_ratio()},
            {"sent", report.total_sent()},
            {"delivered", report.total_delivered()},
            {"collided", report.total_collided()},
            {"mmp", report.total_mmp()}};
}

void write_report_csv(std::ostream& out, const sim::SimReport& report, const sched::ScheduleProblem& problem)
{
    const auto checks = sim::completion_times(report, problem);
    out << "connection,sent,delivered,collided,mmp,mmp_lost,backoffs,completion_s,met_deadline\n";
    int lost = 0, backoffs = 0;
    for (std::size_t i = 0; i < report.connections.size(); ++i)
    {
        const auto& r = report.connections[i];
        lost += r.mmp_lost;
        backoffs += r.backoffs;
        out << r.id << ',' << r.sent << ',' << r.delivered << ',' << r.collided << ',' << r.mmp_count << ','
            << r.mmp_lost << ',' << r.backoffs << ',' << (r.completion ? seconds_text(*r.completion) : "") << ','
            << (checks[i].met_deadline ? "true" : "false") << '\n';
    }
    out << "ALL," << report.total_sent() << ',' << report.total_delivered() << ',' << report.total_collided() << ','
        << report.total_mmp() << ',' << lost << ',' << backoffs << ",,\n";
}

void write_report_text(std::ostream& out, const sim::SimReport& report, const sched::ScheduleProblem& problem)
{
    const auto checks = sim::completion_times(report, problem);
    out << std::left << std::setw(12) << "connection" << std::setw(7) << "sent" << std::setw(11) << "delivered"
        << std::setw(10) << "collided" << std::setw(6) << "mmp" << std::setw(10) << "backoffs" << std::setw(16)
        << "completion_s" << "deadline\n";
    for (std::size_t i = 0; i < report.connections.size(); ++i)
    {
        const auto& r = report.connections[i];
        out << std::left << std::setw(12) << r.id << std::setw(7) << r.sent << std::setw(11) << r.delivered
            << std::setw(10) << r.collided << std::setw(6) << r.mmp_count << std::setw(10) << r.backoffs
            << std::setw(16) << (r.completion ? seconds_text(*r.completion) : "incomplete")
            << (checks[i].met_deadline ? "met" : "missed") << '\n';
    }
    out << "pdr " << fixed(report.pdr(), 4) << "  collision_ratio " << fixed(report.collision_ratio(), 4)
        << "  mmp_ratio " << fixed(report.mmp_ratio(), 4) << '\n';
}

Json probability_table_to_json(const std::vector<prob::ProbabilityRow>& rows, unsigned digits)
{
    Json out = Json::array();
    for (const auto& r : rows)
        out.push_back({{"n", r.n},
                       {"p_free", prob::to_decimal(r.p_free, digits)},
                       {"p_collision", prob::to_decimal(r.p_collision, digits)},
                       {"p_free_exact", prob::to_fraction(r.p_free)},
                       {"p_collision_exact", prob::to_fraction(r.p_collision)}});
    return out;
}

void write_probability_csv(std::ostream& out, const std::vector<prob::ProbabilityRow>& rows, unsigned digits)
{
    out << "n,p_free,p_collision\n";
    for (const auto& r : rows)
        out << r.n << ',' << prob::to_decimal(r.p_free, digits) << ',' << prob::to_decimal(r.p_collision, digits)
            << '\n';
}

void write_probability_text(std::ostream& out, const std::vector<prob::ProbabilityRow>& rows, unsigned digits)
{
    const int width = std::max(13, static_cast<int>(digits) + 6);
    out << std::left << std::setw(6) << "n" << std::setw(width) << "p_free" << std::setw(width) << "p_collision"
        << "exact p_free\n";
    for (const auto& r : rows)
        out << std::left << std::setw(6) << r.n << std::setw(width) << prob::to_decimal(r.p_free, digits)
            << std::setw(width) << prob::to_decimal(r.p_collision, digits) << prob::to_fraction(r.p_free) << '\n';
}

harness::SweepSpec sweep_spec_from_json(const Json& doc)
{
    harness::SweepSpec spec;
    spec.connections = connections_from_json(doc, false);
    spec.epoch_start = doc.contains("epoch_start_s") ? seconds_at(doc, "epoch_start_s", "") : spec.epoch_start;
    spec.step = seconds_at(doc, "delta_s", "");
    spec.margin = doc.contains("tau_s") ? seconds_at(doc, "tau_s", "") : Micros{0};
    spec.mac = mac_from_json(doc);
    if (doc.contains("d_proc_us"))
        spec.d_proc = micros_at(doc, "d_proc_us", "");

    if (doc.contains("windows_s"))
    {
        const Json& list = array_at(doc, "windows_s", "");
        spec.windows.clear();
        for (std::size_t i = 0; i < list.size(); ++i)
        {
            const std::string where = "windows_s[" + std::to_string(i) + "]";
            if (!list[i].is_number())
                throw InputError(where + ": expected a number");
            spec.windows.push_back(seconds_to_micros(list[i].get<double>(), where));
        }
    }
    else if (doc.contains("default_windows"))
    {
        const Json& grid = doc.at("default_windows");
        const int count = number_or<int>(grid, "count", "default_windows", 16);
        spec.windows = harness::default_windows(spec.connections, spec.mac, count);
        if (grid.contains("include_s"))
        {
            const Json& extra = array_at(grid, "include_s", "default_windows");
            for (std::size_t i = 0; i < extra.size(); ++i)
            {
                const std::string where = "default_windows.include_s[" + std::to_string(i) + "]";
                if (!extra[i].is_number())
                    throw InputError(where + ": expected a number");
                spec.windows.push_back(seconds_to_micros(extra[i].get<double>(), where));
            }
            std::sort(spec.windows.begin(), spec.windows.end());
            spec.windows.erase(std::unique(spec.windows.begin(), spec.windows.end()), spec.windows.end());
        }
    }
    else
    {
        throw InputError("sweep spec needs 'windows_s' or 'default_windows'");
    }

    if (doc.contains("strategies"))
    {
        spec.strategies.clear();
        for (const auto& s : array_at(doc, "strategies", ""))
        {
            if (!s.is_string())
                throw InputError("strategies: expected strings");
            spec.strategies.push_back(harness::parse_strategy(s.get<std::string>()));
        }
    }

    if (doc.contains("seeds"))
    {
        const Json& list = array_at(doc, "seeds", "");
        for (std::size_t i = 0; i < list.size(); ++i)
        {
            if (!list[i].is_number_unsigned() && !(list[i].is_number_integer() && list[i].get<std::int64_t>() >= 0))
                throw InputError("seeds[" + std::to_string(i) + "]: expected a non-negative integer");
            spec.seeds.push_back(list[i].get<std::uint64_t>());
        }
    }
    else
    {
        spec.seeds = harness::default_seeds(number_or<int>(doc, "seed_count", "", 30));
    }
    spec.replication = number_or<int>(doc, "replication", "", 1);
    spec.validate();
    return spec;
}

Json sweep_result_to_json(const harness::SweepResult& result)
{
    Json durations = Json::array();
    for (auto d : result.durations)
        durations.push_back(d.count());

    Json cells = Json::array();
    for (const auto& cell : result.cells)
    {
        Json conns = Json::array();
        for (const auto& c : cell.connections)
            conns.push_back({{"id", c.id},
                             {"sent", c.sent},
                             {"delivered", c.delivered},
                             {"collided", c.collided},
                             {"mmp", c.mmp},
                             {"completion_s", optional_number(c.completion_s)},
                             {"incomplete_runs", c.incomplete_runs}});
        Json runs = Json::array();
        for (const auto& r : cell.runs)
        {
            Json starts = Json::array();
            for (auto t : r.start_times)
                starts.push_back(t.count());
            runs.push_back({{"seed", r.seed},
                            {"replicate", r.replicate},
                            {"start_times_us", starts},
                            {"schedule_cost_us", r.schedule_cost.count()},
                            {"sent", r.sent},
                            {"delivered", r.delivered},
                            {"collided", r.collided},
                            {"mmp", r.mmp}});
        }
        cells.push_back({{"window_us", cell.window.count()},
                         {"window_s", to_seconds(cell.window)},
                         {"strategy", harness::to_string(cell.strategy)},
                         {"pdr", cell.pdr},
                         {"collision_ratio", cell.collision_ratio},
                         {"mmp_ratio", cell.mmp_ratio},
                         {"pdr_min", cell.pdr_min},
                         {"pdr_max", cell.pdr_max},
                         {"connections", conns},
                         {"runs", runs}});
    }

    Json averages = Json::array();
    for (const auto& a : result.averages)
        averages.push_back({{"strategy", harness::to_string(a.strategy)},
                            {"average_pdr", a.average_pdr},
                            {"average_collision_ratio", a.average_collision_ratio},
                            {"average_mmp_ratio", a.average_mmp_ratio}});

    return {{"epoch_start_us", result.epoch_start.count()},
            {"connection_ids", result.connection_ids},
            {"durations_us", durations},
            {"cells", cells},
            {"averages", averages}};
}

harness::SweepResult sweep_result_from_json(const Json& doc)
{
    harness::SweepResult out;
    try
    {
        out.epoch_start = Micros{doc.at("epoch_start_us").get<std::int64_t>()};
        out.connection_ids = doc.at("connection_ids").get<std::vector<int>>();
        for (const auto& d : doc.at("durations_us"))
            out.durations.emplace_back(d.get<std::int64_t>());
        for (const auto& c : doc.at("cells"))
        {
            harness::SweepCell cell;
            cell.window = Micros{c.at("window_us").get<std::int64_t>()};
            cell.strategy = harness::parse_strategy(c.at("strategy").get<std::string>());
            cell.pdr = c.at("pdr").get<double>();
            cell.collision_ratio = c.at("collision_ratio").get<double>();
            cell.mmp_ratio = c.at("mmp_ratio").get<double>();
            cell.pdr_min = c.at("pdr_min").get<double>();
            cell.pdr_max = c.at("pdr_max").get<double>();
            for (const auto& k : c.at("connections"))
            {
                harness::ConnectionCell cc;
                cc.id = k.at("id").get<int>();
                cc.sent = k.at("sent").get<std::int64_t>();
                cc.delivered = k.at("delivered").get<std::int64_t>();
                cc.collided = k.at("collided").get<std::int64_t>();
                cc.mmp = k.at("mmp").get<std::int64_t>();
                if (!k.at("completion_s").is_null())
                    cc.completion_s = k.at("completion_s").get<double>();
                cc.incomplete_runs = k.at("incomplete_runs").get<int>();
                cell.connections.push_back(cc);
            }
            for (const auto& r : c.at("runs"))
            {
                harness::RunSummary run;
                run.seed = r.at("seed").get<std::uint64_t>();
                run.replicate = r.at("replicate").get<int>();
                for (const auto& t : r.at("start_times_us"))
                    run.start_times.emplace_back(t.get<std::int64_t>());
                run.schedule_cost = Micros{r.at("schedule_cost_us").get<std::int64_t>()};
                run.sent = r.at("sent").get<int>();
                run.delivered = r.at("delivered").get<int>();
                run.collided = r.at("collided").get<int>();
                run.mmp = r.at("mmp").get<int>();
                cell.runs.push_back(std::move(run));
            }
            out.cells.push_back(std::move(cell));
        }
        for (const auto& a : doc.at("averages"))
            out.averages.push_back({harness::parse_strategy(a.at("strategy").get<std::string>()),
                                    a.at("average_pdr").get<double>(), a.at("average_collision_ratio").get<double>(),
                                    a.at("average_mmp_ratio").get<double>()});
    }
    catch (const Json::exception& e)
    {
        throw InputError(std::string("malformed sweep report: ") + e.what());
    }
    return out;
}

void write_sweep_csv(std::ostream& out, const harness::SweepResult& result)
{
    out << "window_s,strategy,connection,sent,delivered,collided,mmp,completion_s\n";
    auto completion = [](const std::optional<double>& v) { return v ? fixed(*v, 6) : std::string(); };
    for (const auto& cell : result.cells)
    {
        const std::string prefix = seconds_text(cell.window) + "," + std::string(harness::to_string(cell.strategy));
        std::int64_t sent = 0, delivered = 0, collided = 0, mmp = 0;
        for (const auto& c : cell.connections)
        {
            out << prefix << ',' << c.id << ',' << c.sent << ',' << c.delivered << ',' << c.collided << ',' << c.mmp
                << ',' << completion(c.completion_s) << '\n';
            sent += c.sent;
            delivered += c.delivered;
            collided += c.collided;
            mmp += c.mmp;
        }
        out << prefix << ",ALL," << sent << ',' << delivered << ',' << collided << ',' << mmp << ",\n";
    }
}

Json comparison_to_json(const harness::Comparison& comparison)
{
    auto averages = [](const harness::StrategyAverages& a) {
        return Json{{"average_pdr", a.average_pdr},
                    {"average_collision_ratio", a.average_collision_ratio},
                    {"average_mmp_ratio", a.average_mmp_ratio}};
    };
    Json windows = Json::array();
    for (const auto& w : comparison.windows)
        windows.push_back({{"window_s", to_seconds(w.window)},
                           {"pdr_delta", w.pdr_delta},
                           {"collision_delta", w.collision_delta},
                           {"mmp_delta", w.mmp_delta},
                           {"completion_delta_s", optional_number(w.completion_delta_s)}});
    return {{"tsgs", averages(comparison.tsgs)},
            {"random", averages(comparison.random)},
            {"pdr_delta", comparison.pdr_delta},
            {"collision_delta", comparison.collision_delta},
            {"mmp_delta", comparison.mmp_delta},
            {"relative_pdr_improvement", optional_number(comparison.relative_pdr_improvement)},
            {"relative_collision_improvement", optional_number(comparison.relative_collision_improvement)},
            {"relative_mmp_improvement", optional_number(comparison.relative_mmp_improvement)},
            {"windows", windows}};
}

void write_comparison_csv(std::ostream& out, const harness::Comparison& comparison)
{
    out << "window_s,pdr_delta,collision_delta,mmp_delta,completion_delta_s\n";
    for (const auto& w : comparison.windows)
        out << seconds_text(w.window) << ',' << fixed(w.pdr_delta, 6) << ',' << fixed(w.collision_delta, 6) << ','
            << fixed(w.mmp_delta, 6) << ',' << (w.completion_delta_s ? fixed(*w.completion_delta_s, 6) : "") << '\n';
    out << "AVERAGE," << fixed(comparison.pdr_delta, 6) << ',' << fixed(comparison.collision_delta, 6) << ','
        << fixed(comparison.mmp_delta, 6) << ",\n";
}

std::string canonical(const Json& doc)
{
    return doc.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw DomainError(path.string() + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out)
        throw DomainError(path.string() + ": write failed");
}

} // namespace linksched::io
