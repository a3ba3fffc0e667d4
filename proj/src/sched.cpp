#include "linksched/sched.hpp"

#include "linksched/errors.hpp"
#include "linksched/rng.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace linksched::sched {

void ConnectionSpec::validate() const
{
    const std::string who = "connection " + std::to_string(id);
    if (packet_count < 1)
        throw InputError(who + ": packet_count must be >= 1");
    if (packet_airtime <= Micros{0})
        throw InputError(who + ": packet airtime must be positive");
    if (sender == receiver)
        throw InputError(who + ": sender and receiver must differ");
}

void ScheduleProblem::validate() const
{
    if (connections.empty())
        throw InputError("problem has no connections");
    if (step <= Micros{0})
        throw InputError("search step must be positive");
    if (margin < Micros{0})
        throw InputError("backoff margin must be non-negative");
    for (const auto& c : connections)
        c.validate();
}

void SearchSpace::validate() const
{
    if (durations.empty())
        throw InputError("search space is empty");
    if (durations.size() != windows.size())
        throw InputError("durations and windows differ in length");
    if (step <= Micros{0})
        throw InputError("search step must be positive");
    for (std::size_t i = 0; i < durations.size(); ++i)
    {
        if (durations[i] < Micros{0})
            throw InputError("negative duration at index " + std::to_string(i));
        if (windows[i] < Micros{0})
            throw DomainError("negative window at index " + std::to_string(i));
    }
}

Micros nominal_duration(const ConnectionSpec& c, Micros per_packet_gap)
{
    return c.packet_count * (c.packet_airtime + per_packet_gap);
}

Micros nominal_duration(const ConnectionSpec& c, const MacTiming& mac)
{
    return nominal_duration(c, mac.aifs());
}

Micros pairwise_overlap(Interval a, Interval b)
{
    const Micros lo = std::max(a.start, b.start);
    const Micros hi = std::min(a.end, b.end);
    return std::max(Micros{0}, hi - lo);
}

Micros overlap_cost(std::span<const Micros> starts, std::span<const Micros> durations)
{
    if (starts.size() != durations.size())
        throw InputError("overlap_cost: " + std::to_string(starts.size()) + " start times for " +
                         std::to_string(durations.size()) + " durations");
    Micros unordered{0};
    for (std::size_t i = 0; i < starts.size(); ++i)
        for (std::size_t j = i + 1; j < starts.size(); ++j)
            unordered += pairwise_overlap({starts[i], starts[i] + durations[i]},
                                          {starts[j], starts[j] + durations[j]});
    return 2 * unordered;
}

SearchSpace build_search_space(const ScheduleProblem& problem, const MacTiming& mac)
{
    problem.validate();
    mac.validate();
    SearchSpace space;
    space.step = problem.step;
    for (const auto& c : problem.connections)
    {
        const Micros d = nominal_duration(c, mac);
        const Micros w = (c.deadline - problem.epoch_start) - d - problem.margin;
        if (w < Micros{0})
            throw DomainError("connection " + std::to_string(c.id) + " is infeasible: deadline " +
                              std::to_string(to_seconds(c.deadline)) + " s leaves " +
                              std::to_string(to_seconds(c.deadline - problem.epoch_start)) +
                              " s after the epoch but needs " + std::to_string(to_seconds(d + problem.margin)) +
                              " s");
        space.durations.push_back(d);
        space.windows.push_back(w);
    }
    return space;
}

Schedule tsgs_schedule(const SearchSpace& space, TsgsStats* stats)
{
    space.validate();
    const std::size_t n = space.size();
    Schedule out;
    out.start_times.reserve(n);
    std::uint64_t evaluations = 0;

    for (std::size_t i = 0; i < n; ++i)
    {
        const std::int64_t sigma = space.candidates(i);
        std::int64_t best_k = 0;
        Micros best_cost = Micros::max();
        for (std::int64_t k = 0; k < sigma; ++k)
        {
            const Interval candidate{k * space.step, k * space.step + space.durations[i]};
            Micros phi{0};
            for (std::size_t j = 0; j < i; ++j)
                phi += pairwise_overlap(candidate, {out.start_times[j], out.start_times[j] + space.durations[j]});
            evaluations += i;
            if (phi < best_cost)
            {
                best_cost = phi;
                best_k = k;
            }
        }
        out.start_times.push_back(best_k * space.step);
    }

    out.cost = overlap_cost(out.start_times, space.durations);
    if (stats)
        stats->overlap_evaluations = evaluations;
    return out;
}

Schedule tsgs_schedule(const ScheduleProblem& problem, const MacTiming& mac, TsgsStats* stats)
{
    return tsgs_schedule(build_search_space(problem, mac), stats);
}

Schedule exhaustive_schedule(const SearchSpace& space, std::uint64_t budget)
{
    space.validate();
    const std::size_t n = space.size();

    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i)
    {
        const auto sigma = static_cast<std::uint64_t>(space.candidates(i));
        if (total > budget / sigma)
            throw BudgetExceeded("exhaustive search needs more than " + std::to_string(budget) +
                                 " candidate tuples; reduce the number of connections or enlarge the step");
        total *= sigma;
    }

    // Odometer over the grid in lexicographic order; strict improvement keeps
    // the lexicographically smallest minimizer.
    std::vector<std::int64_t> k(n, 0);
    std::vector<Micros> starts(n, Micros{0});
    Schedule best{starts, overlap_cost(starts, space.durations)};
    for (std::uint64_t visited = 1; visited < total; ++visited)
    {
        std::size_t pos = n;
        while (pos-- > 0)
        {
            if (++k[pos] < space.candidates(pos))
                break;
            k[pos] = 0;
        }
        for (std::size_t i = 0; i < n; ++i)
            starts[i] = k[i] * space.step;
        const Micros cost = overlap_cost(starts, space.durations);
        if (cost < best.cost)
            best = {starts, cost};
    }
    return best;
}

Schedule random_schedule(const SearchSpace& space, std::uint64_t seed)
{
    space.validate();
    RandomStream rng(derive_seed({seed, 0x72616e64ULL}));
    Schedule out;
    out.start_times.reserve(space.size());
    for (std::size_t i = 0; i < space.size(); ++i)
    {
        const auto k = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(space.candidates(i))));
        out.start_times.push_back(k * space.step);
    }
    out.cost = overlap_cost(out.start_times, space.durations);
    return out;
}

void check_schedule(const SearchSpace& space, const Schedule& schedule)
{
    if (schedule.start_times.size() != space.size())
        throw DomainError("schedule has " + std::to_string(schedule.start_times.size()) +
                          " start times but the problem has " + std::to_string(space.size()) + " connections");
    for (std::size_t i = 0; i < space.size(); ++i)
    {
        const Micros t = schedule.start_times[i];
        if (t < Micros{0} || t > space.windows[i])
            throw DomainError("start time " + std::to_string(to_seconds(t)) + " s of connection index " +
                              std::to_string(i) + " lies outside its window [0, " +
                              std::to_string(to_seconds(space.windows[i])) + "] s");
        if (t.count() % space.step.count() != 0)
            throw DomainError("start time of connection index " + std::to_string(i) + " is not on the search grid");
    }
}

} // namespace linksched::sched
