#include "linksched/harness.hpp"

#include "linksched/errors.hpp"
#include "linksched/rng.hpp"
#include "linksched/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace linksched::harness {

std::string_view to_string(Strategy s)
{
    switch (s)
    {
    case Strategy::tsgs: return "tsgs";
    case Strategy::random: return "random";
    }
    return "unknown";
}

Strategy parse_strategy(std::string_view name)
{
    if (name == "tsgs")
        return Strategy::tsgs;
    if (name == "random")
        return Strategy::random;
    throw InputError("unknown strategy '" + std::string(name) + "' (expected tsgs or random)");
}

void SweepSpec::validate() const
{
    if (connections.empty())
        throw InputError("sweep has no connections");
    for (const auto& c : connections)
        c.validate();
    if (windows.empty())
        throw InputError("sweep has no windows");
    for (std::size_t i = 1; i < windows.size(); ++i)
        if (windows[i] <= windows[i - 1])
            throw InputError("sweep windows must be strictly increasing");
    if (strategies.empty())
        throw InputError("sweep has no strategies");
    if (seeds.empty())
        throw InputError("sweep has no seeds");
    if (replication < 1)
        throw InputError("replication must be >= 1");
    if (step <= Micros{0})
        throw InputError("search step must be positive");
    if (margin < Micros{0})
        throw InputError("backoff margin must be non-negative");
    if (d_proc < Micros{0})
        throw InputError("receiver processing time must be non-negative");
    mac.validate();
}

std::vector<Micros> default_windows(const std::vector<sched::ConnectionSpec>& connections, const MacTiming& mac,
                                    int count)
{
    if (connections.empty() || count < 1)
        throw InputError("default windows need at least one connection and one point");
    Micros longest{0};
    Micros total{0};
    for (const auto& c : connections)
    {
        const Micros d = sched::nominal_duration(c, mac);
        longest = std::max(longest, d);
        total += d;
    }
    const double lo = 1.05 * static_cast<double>(longest.count());
    const double hi = 2.5 * static_cast<double>(total.count());
    std::vector<Micros> out;
    for (int i = 0; i < count; ++i)
    {
        const double x = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
        const Micros w{std::llround(std::ceil(x))};
        if (out.empty() || w > out.back())
            out.push_back(w);
    }
    return out;
}

std::vector<std::uint64_t> default_seeds(int count)
{
    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
    std::iota(seeds.begin(), seeds.end(), std::uint64_t{1});
    return seeds;
}

const StrategyAverages* SweepResult::averages_for(Strategy s) const
{
    for (const auto& a : averages)
        if (a.strategy == s)
            return &a;
    return nullptr;
}

std::vector<const SweepCell*> SweepResult::cells_for(Strategy s) const
{
    std::vector<const SweepCell*> out;
    for (const auto& c : cells)
        if (c.strategy == s)
            out.push_back(&c);
    return out;
}

namespace {

sched::ScheduleProblem problem_for_window(const SweepSpec& spec, Micros window)
{
    sched::ScheduleProblem problem{spec.connections, spec.epoch_start, spec.step, spec.margin};
    for (auto& c : problem.connections)
        c.deadline = spec.epoch_start + window;
    return problem;
}

double ratio(std::int64_t num, std::int64_t den)
{
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

SweepCell run_cell(const SweepSpec& spec, const sched::ScheduleProblem& problem, const sched::SearchSpace& space,
                   Micros window, Strategy strategy)
{
    SweepCell cell{.window = window, .strategy = strategy};
    for (const auto& c : problem.connections)
        cell.connections.push_back({.id = c.id});
    std::vector<double> completion_sum(problem.connections.size(), 0.0);
    std::vector<int> completed(problem.connections.size(), 0);

    std::optional<sched::Schedule> fixed;
    if (strategy == Strategy::tsgs)
        fixed = sched::tsgs_schedule(space);

    std::int64_t sent = 0, delivered = 0, collided = 0, mmp = 0;
    bool first = true;
    for (std::uint64_t seed : spec.seeds)
    {
        for (int rep = 0; rep < spec.replication; ++rep)
        {
            const std::uint64_t run_seed = rep == 0 ? seed : derive_seed({seed, static_cast<std::uint64_t>(rep)});
            const sched::Schedule schedule =
                fixed ? *fixed
                      : sched::random_schedule(space, derive_seed({run_seed, static_cast<std::uint64_t>(window.count())}));

            sim::SimConfig config{.mac = spec.mac, .d_proc = spec.d_proc, .seed = run_seed};
            const sim::SimReport report = sim::run_simulation(problem, schedule, config);

            RunSummary run{.seed = seed,
                           .replicate = rep,
                           .start_times = schedule.start_times,
                           .schedule_cost = schedule.cost,
                           .sent = report.total_sent(),
                           .delivered = report.total_delivered(),
                           .collided = report.total_collided(),
                           .mmp = report.total_mmp()};
            for (std::size_t i = 0; i < report.connections.size(); ++i)
            {
                const auto& row = report.connections[i];
                auto& agg = cell.connections[i];
                agg.sent += row.sent;
                agg.delivered += row.delivered;
                agg.collided += row.collided;
                agg.mmp += row.mmp_count;
                if (row.completion)
                {
                    completion_sum[i] += to_seconds(*row.completion);
                    ++completed[i];
                }
                else
                {
                    ++agg.incomplete_runs;
                }
            }
            sent += run.sent;
            delivered += run.delivered;
            collided += run.collided;
            mmp += run.mmp;

            const double run_pdr = ratio(run.delivered, run.sent);
            cell.pdr_min = first ? run_pdr : std::min(cell.pdr_min, run_pdr);
            cell.pdr_max = first ? run_pdr : std::max(cell.pdr_max, run_pdr);
            first = false;
            cell.runs.push_back(std::move(run));
        }
    }

    for (std::size_t i = 0; i < cell.connections.size(); ++i)
        if (completed[i] > 0)
            cell.connections[i].completion_s = completion_sum[i] / completed[i];
    cell.pdr = ratio(delivered, sent);
    cell.collision_ratio = ratio(collided, sent);
    cell.mmp_ratio = ratio(mmp, sent);
    return cell;
}

} // namespace

SweepResult run_sweep(const SweepSpec& spec)
{
    spec.validate();

    SweepResult result;
    result.epoch_start = spec.epoch_start;
    for (const auto& c : spec.connections)
    {
        result.connection_ids.push_back(c.id);
        result.durations.push_back(sched::nominal_duration(c, spec.mac));
    }

    // Reject infeasible windows before any simulation runs.
    std::vector<std::pair<sched::ScheduleProblem, sched::SearchSpace>> problems;
    for (Micros window : spec.windows)
    {
        auto problem = problem_for_window(spec, window);
        auto space = sched::build_search_space(problem, spec.mac);
        problems.emplace_back(std::move(problem), std::move(space));
    }

    for (std::size_t w = 0; w < spec.windows.size(); ++w)
        for (Strategy s : spec.strategies)
            result.cells.push_back(run_cell(spec, problems[w].first, problems[w].second, spec.windows[w], s));

    for (Strategy s : spec.strategies)
    {
        const auto cells = result.cells_for(s);
        StrategyAverages avg{.strategy = s};
        for (const SweepCell* c : cells)
        {
            avg.average_pdr += c->pdr;
            avg.average_collision_ratio += c->collision_ratio;
            avg.average_mmp_ratio += c->mmp_ratio;
        }
        const auto n = static_cast<double>(cells.size());
        avg.average_pdr /= n;
        avg.average_collision_ratio /= n;
        avg.average_mmp_ratio /= n;
        result.averages.push_back(avg);
    }
    return result;
}

std::vector<double> per_seed_average_pdr(const SweepResult& result, Strategy s)
{
    std::vector<std::uint64_t> order;
    std::map<std::uint64_t, double> sums;
    const auto cells = result.cells_for(s);
    for (const SweepCell* cell : cells)
    {
        std::map<std::uint64_t, std::pair<std::int64_t, std::int64_t>> pooled;
        for (const auto& run : cell->runs)
        {
            if (std::find(order.begin(), order.end(), run.seed) == order.end())
                order.push_back(run.seed);
            pooled[run.seed].first += run.delivered;
            pooled[run.seed].second += run.sent;
        }
        for (const auto& [seed, counts] : pooled)
            sums[seed] += ratio(counts.first, counts.second);
    }
    std::vector<double> out;
    for (auto seed : order)
        out.push_back(sums[seed] / static_cast<double>(cells.size()));
    return out;
}

Comparison compare_strategies(const SweepResult& result)
{
    const auto* tsgs = result.averages_for(Strategy::tsgs);
    const auto* random = result.averages_for(Strategy::random);
    if (!tsgs || !random)
        throw InputError("comparison needs results for both tsgs and random");

    Comparison out;
    out.tsgs = *tsgs;
    out.random = *random;
    out.pdr_delta = tsgs->average_pdr - random->average_pdr;
    out.collision_delta = tsgs->average_collision_ratio - random->average_collision_ratio;
    out.mmp_delta = tsgs->average_mmp_ratio - random->average_mmp_ratio;
    if (random->average_pdr > 0)
        out.relative_pdr_improvement = out.pdr_delta / random->average_pdr;
    if (random->average_collision_ratio > 0)
        out.relative_collision_improvement =
            (random->average_collision_ratio - tsgs->average_collision_ratio) / random->average_collision_ratio;
    if (random->average_mmp_ratio > 0)
        out.relative_mmp_improvement =
            (random->average_mmp_ratio - tsgs->average_mmp_ratio) / random->average_mmp_ratio;

    const auto t_cells = result.cells_for(Strategy::tsgs);
    const auto r_cells = result.cells_for(Strategy::random);
    for (std::size_t i = 0; i < t_cells.size() && i < r_cells.size(); ++i)
    {
        const SweepCell& t = *t_cells[i];
        const SweepCell& r = *r_cells[i];
        WindowDelta d{.window = t.window,
                      .pdr_delta = t.pdr - r.pdr,
                      .collision_delta = t.collision_ratio - r.collision_ratio,
                      .mmp_delta = t.mmp_ratio - r.mmp_ratio};
        double sum = 0;
        bool complete = !t.connections.empty();
        for (std::size_t c = 0; c < t.connections.size() && complete; ++c)
        {
            const auto& tc = t.connections[c].completion_s;
            const auto& rc = r.connections[c].completion_s;
            if (!tc || !rc)
                complete = false;
            else
                sum += *tc - *rc;
        }
        if (complete)
            d.completion_delta_s = sum / static_cast<double>(t.connections.size());
        out.windows.push_back(d);
    }
    return out;
}

SignTest sign_test_greater(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size())
        throw InputError("sign test needs paired samples of equal length");
    SignTest out;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        if (a[i] > b[i])
            ++out.wins;
        else if (a[i] < b[i])
            ++out.losses;
        else
            ++out.ties;
    }
    const int n = out.wins + out.losses;
    if (n == 0)
        return out;
    // Upper tail of Binomial(n, 1/2), summed in log space.
    double tail = 0;
    for (int k = out.wins; k <= n; ++k)
        tail += std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
    out.p_value = std::min(1.0, tail);
    return out;
}

} // namespace linksched::harness
