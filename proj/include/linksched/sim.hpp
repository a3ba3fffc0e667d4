#pragma once

#include "linksched/mac.hpp"
#include "linksched/sched.hpp"
#include "linksched/time.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace linksched::sim {

struct SimConfig
{
    MacTiming mac;
    /// How long a receiver's single receive unit stays occupied once it
    /// locks onto a transmission.
    Micros d_proc{23};
    std::uint64_t seed = 0;
    bool record_trace = false;
};

enum class TraceKind
{
    start_tx,
    end_tx,
    collision,
    delivery,
    mmp,
    backoff_draw,
};

const char* to_string(TraceKind kind);

struct TraceEvent
{
    Micros time{0};
    TraceKind event = TraceKind::start_tx;
    int connection = 0;
    std::string detail;

    bool operator==(const TraceEvent&) const = default;
};

struct ConnectionReport
{
    int id = 0;
    int sent = 0;
    int delivered = 0;
    int collided = 0;
    /// Arrivals (desired or not) at this connection's receiver while its
    /// receive unit was busy.
    int mmp_count = 0;
    /// Own packets lost because the receiver was busy.
    int mmp_lost = 0;
    int backoffs = 0;
    /// End of the last packet's transmission; empty if the run hit the
    /// horizon first.
    std::optional<Micros> completion;

    bool operator==(const ConnectionReport&) const = default;
};

struct SimReport
{
    std::vector<ConnectionReport> connections;
    std::vector<TraceEvent> trace;

    [[nodiscard]] int total_sent() const;
    [[nodiscard]] int total_delivered() const;
    [[nodiscard]] int total_collided() const;
    [[nodiscard]] int total_mmp() const;

    /// Ratios over sent packets; zero when nothing was sent.
    [[nodiscard]] double pdr() const;
    [[nodiscard]] double collision_ratio() const;
    [[nodiscard]] double mmp_ratio() const;

    bool operator==(const SimReport&) const = default;
};

/// Runs the schedule on one shared broadcast channel.
///
/// Senders wake at epoch + t_i and send their packets back to back. Each
/// access senses the channel for AIFS; a sender that finds the channel busy
/// (at the attempt or during AIFS) draws one backoff uniform on [0, cw_min],
/// counts it down on idle slots after AIFS, and freezes it while the channel
/// is busy. Overlapping transmissions are all lost. Every idle receiver locks
/// onto a clean transmission for d_proc; packets that reach a locked receiver
/// are MMP events.
///
/// Throws DomainError if `schedule` does not fit `problem`.
SimReport run_simulation(const sched::ScheduleProblem& problem, const sched::Schedule& schedule,
                         const SimConfig& config);

struct DeadlineCheck
{
    int id = 0;
    bool met_deadline = false;
    std::optional<Micros> completion;
};

/// met_deadline iff the connection finished no later than its deadline.
std::vector<DeadlineCheck> completion_times(const SimReport& report, const sched::ScheduleProblem& problem);

/// CSV: time_us,event,connection,detail
void write_trace_csv(std::ostream& out, const std::vector<TraceEvent>& trace);

} // namespace linksched::sim
