#pragma once

#include "linksched/mac.hpp"
#include "linksched/time.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace linksched::sched {

/// One sender->receiver link carrying a fixed batch of packets.
struct ConnectionSpec
{
    int id = 0;
    int sender = 0;
    int receiver = 0;
    int packet_count = 1;
    Micros packet_airtime{0};
    /// Absolute time by which the last packet must have been sent.
    Micros deadline{0};

    void validate() const;
};

struct ScheduleProblem
{
    std::vector<ConnectionSpec> connections;
    Micros epoch_start{0};
    /// Search step between candidate start offsets.
    Micros step{1};
    /// Extra margin reserved for backoff stretching; shrinks every window.
    Micros margin{0};

    void validate() const;
};

struct Interval
{
    Micros start{0};
    Micros end{0};
};

/// Start offsets relative to the epoch plus the total pairwise overlap.
struct Schedule
{
    std::vector<Micros> start_times;
    Micros cost{0};

    bool operator==(const Schedule&) const = default;
};

/// Durations, admissible windows and grid step: everything the search
/// algorithms need, stripped of link identities.
struct SearchSpace
{
    std::vector<Micros> durations;
    std::vector<Micros> windows;
    Micros step{1};

    [[nodiscard]] std::size_t size() const { return durations.size(); }
    /// Number of grid candidates for connection i: floor(w_i / step) + 1.
    [[nodiscard]] std::int64_t candidates(std::size_t i) const { return windows[i] / step + 1; }

    /// Throws InputError on shape problems and DomainError on a negative window.
    void validate() const;
};

struct TsgsStats
{
    std::uint64_t overlap_evaluations = 0;
};

/// packet_count * (airtime + gap): contention-free back-to-back airtime.
Micros nominal_duration(const ConnectionSpec& c, Micros per_packet_gap);
Micros nominal_duration(const ConnectionSpec& c, const MacTiming& mac);

Micros pairwise_overlap(Interval a, Interval b);

/// Sum over ordered pairs (i != j) of the overlap of [t_i, t_i + d_i] and
/// [t_j, t_j + d_j]; twice the unordered sum.
Micros overlap_cost(std::span<const Micros> starts, std::span<const Micros> durations);

/// Computes d_i and w_i = (q_i - epoch) - d_i - margin for every connection.
/// Throws DomainError naming the first connection whose window is negative.
SearchSpace build_search_space(const ScheduleProblem& problem, const MacTiming& mac);

/// Greedy placement in input order. Each connection takes the earliest grid
/// point minimizing overlap with the connections already placed.
Schedule tsgs_schedule(const SearchSpace& space, TsgsStats* stats = nullptr);
Schedule tsgs_schedule(const ScheduleProblem& problem, const MacTiming& mac, TsgsStats* stats = nullptr);

inline constexpr std::uint64_t default_exhaustive_budget = 10'000'000;

/// Global minimizer over the full grid; lexicographically smallest among ties.
/// Throws BudgetExceeded when the grid has more than `budget` points.
Schedule exhaustive_schedule(const SearchSpace& space, std::uint64_t budget = default_exhaustive_budget);

/// Each start drawn independently and uniformly from its grid.
Schedule random_schedule(const SearchSpace& space, std::uint64_t seed);

/// Throws DomainError when the schedule's length, grid alignment or window
/// bounds do not fit `space`.
void check_schedule(const SearchSpace& space, const Schedule& schedule);

} // namespace linksched::sched
