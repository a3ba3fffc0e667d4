#pragma once

#include "linksched/mac.hpp"
#include "linksched/sched.hpp"
#include "linksched/time.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace linksched::harness {

enum class Strategy
{
    tsgs,
    random,
};

std::string_view to_string(Strategy s);
/// Throws InputError for anything but "tsgs" / "random".
Strategy parse_strategy(std::string_view name);

/// A family of problems that differ only in the shared deadline window.
struct SweepSpec
{
    /// Deadlines are ignored; each window sets q_i = epoch + window.
    std::vector<sched::ConnectionSpec> connections;
    Micros epoch_start{15'000'000};
    Micros step{1};
    Micros margin{0};
    std::vector<Micros> windows;
    std::vector<Strategy> strategies{Strategy::tsgs, Strategy::random};
    std::vector<std::uint64_t> seeds;
    int replication = 1;
    MacTiming mac;
    Micros d_proc{23};

    /// Throws InputError on empty/unsorted windows, no strategies, no seeds,
    /// or replication < 1.
    void validate() const;
};

/// `count` evenly spaced windows from 1.05 * max d_i to 2.5 * sum d_i.
std::vector<Micros> default_windows(const std::vector<sched::ConnectionSpec>& connections, const MacTiming& mac,
                                    int count = 16);

/// Seeds 1..count.
std::vector<std::uint64_t> default_seeds(int count = 30);

struct RunSummary
{
    std::uint64_t seed = 0;
    int replicate = 0;
    std::vector<Micros> start_times;
    Micros schedule_cost{0};
    int sent = 0;
    int delivered = 0;
    int collided = 0;
    int mmp = 0;

    bool operator==(const RunSummary&) const = default;
};

struct ConnectionCell
{
    int id = 0;
    std::int64_t sent = 0;
    std::int64_t delivered = 0;
    std::int64_t collided = 0;
    std::int64_t mmp = 0;
    /// Mean absolute completion time over runs that finished.
    std::optional<double> completion_s;
    int incomplete_runs = 0;

    bool operator==(const ConnectionCell&) const = default;
};

/// Everything measured for one (window, strategy) pair, pooled over seeds
/// and replicates.
struct SweepCell
{
    Micros window{0};
    Strategy strategy = Strategy::tsgs;
    double pdr = 0;
    double collision_ratio = 0;
    double mmp_ratio = 0;
    double pdr_min = 0;
    double pdr_max = 0;
    std::vector<ConnectionCell> connections;
    std::vector<RunSummary> runs;

    bool operator==(const SweepCell&) const = default;
};

struct StrategyAverages
{
    Strategy strategy = Strategy::tsgs;
    double average_pdr = 0;
    double average_collision_ratio = 0;
    double average_mmp_ratio = 0;

    bool operator==(const StrategyAverages&) const = default;
};

struct SweepResult
{
    Micros epoch_start{0};
    std::vector<int> connection_ids;
    std::vector<Micros> durations;
    /// Window-major, strategies in spec order.
    std::vector<SweepCell> cells;
    std::vector<StrategyAverages> averages;

    [[nodiscard]] const StrategyAverages* averages_for(Strategy s) const;
    [[nodiscard]] std::vector<const SweepCell*> cells_for(Strategy s) const;

    bool operator==(const SweepResult&) const = default;
};

/// Schedules and simulates every (window, strategy, seed, replicate) cell.
/// Feasibility of every window is checked before anything runs.
SweepResult run_sweep(const SweepSpec& spec);

/// Mean over windows of the per-seed PDR (replicates pooled), one value per
/// seed in the order of first appearance.
std::vector<double> per_seed_average_pdr(const SweepResult& result, Strategy s);

struct WindowDelta
{
    Micros window{0};
    double pdr_delta = 0;
    double collision_delta = 0;
    double mmp_delta = 0;
    /// Mean over connections of (tsgs - random) completion; empty when a
    /// connection never completed under either strategy.
    std::optional<double> completion_delta_s;
};

struct Comparison
{
    std::vector<WindowDelta> windows;
    StrategyAverages tsgs;
    StrategyAverages random;
    double pdr_delta = 0;
    double collision_delta = 0;
    double mmp_delta = 0;
    /// (tsgs - random) / random; empty when random's PDR is zero.
    std::optional<double> relative_pdr_improvement;
    /// (random - tsgs) / random; empty when random had no collisions.
    std::optional<double> relative_collision_improvement;
    std::optional<double> relative_mmp_improvement;
};

/// Deltas are tsgs minus random. Throws InputError if either strategy is
/// missing from `result`.
Comparison compare_strategies(const SweepResult& result);

struct SignTest
{
    int wins = 0;
    int losses = 0;
    int ties = 0;
    /// One-sided P(X >= wins) for X ~ Binomial(wins + losses, 1/2).
    double p_value = 1;
};

/// Paired sign test that `a` exceeds `b`; ties are dropped.
SignTest sign_test_greater(const std::vector<double>& a, const std::vector<double>& b);

} // namespace linksched::harness
