#include "linksched/sim.hpp"

#include "linksched/errors.hpp"
#include "linksched/rng.hpp"

#include <algorithm>
#include <cassert>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>

namespace linksched::sim {

const char* to_string(TraceKind kind)
{
    switch (kind)
    {
    case TraceKind::start_tx: return "start_tx";
    case TraceKind::end_tx: return "end_tx";
    case TraceKind::collision: return "collision";
    case TraceKind::delivery: return "delivery";
    case TraceKind::mmp: return "mmp";
    case TraceKind::backoff_draw: return "backoff_draw";
    }
    return "unknown";
}

namespace {

template <typename F>
int sum_of(const std::vector<ConnectionReport>& rows, F field)
{
    return std::accumulate(rows.begin(), rows.end(), 0,
                           [&](int acc, const ConnectionReport& r) { return acc + field(r); });
}

double ratio(int num, int den)
{
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

int SimReport::total_sent() const { return sum_of(connections, [](auto& r) { return r.sent; }); }
int SimReport::total_delivered() const { return sum_of(connections, [](auto& r) { return r.delivered; }); }
int SimReport::total_collided() const { return sum_of(connections, [](auto& r) { return r.collided; }); }
int SimReport::total_mmp() const { return sum_of(connections, [](auto& r) { return r.mmp_count; }); }
double SimReport::pdr() const { return ratio(total_delivered(), total_sent()); }
double SimReport::collision_ratio() const { return ratio(total_collided(), total_sent()); }
double SimReport::mmp_ratio() const { return ratio(total_mmp(), total_sent()); }

namespace {

enum class Phase
{
    waiting_for_start,
    sensing_aifs,
    backoff,
    transmitting,
    done,
};

struct SenderState
{
    int id = 0;
    int node = 0;
    int receiver = 0;
    Micros airtime{0};
    int packets_remaining = 0;
    int packet = 0;
    Phase phase = Phase::waiting_for_start;
    /// Slots left on the current packet's backoff; empty until drawn.
    std::optional<int> backoff_counter;
    /// True while a backoff countdown is running on an idle channel.
    bool counting = false;
    /// Start of the current idle-sensing interval.
    Micros sense_from{0};
    std::uint64_t generation = 0;
    RandomStream rng;
};

struct ReceiverState
{
    Micros busy_until{0};
    std::optional<std::size_t> locked_on;
};

struct Transmission
{
    std::size_t sender = 0;
    int packet = 0;
    Micros start{0};
    Micros end{0};
    bool collided = false;
    bool receiver_busy = false;
    /// Connections whose receiver was busy when this packet arrived.
    std::vector<std::size_t> busy_arrivals;
};

// Same-instant ordering: transmissions end first, then access attempts
// sense the channel, then every sender whose wait ran out starts together.
enum class EventKind
{
    tx_end = 0,
    access = 1,
    ready = 2,
};

struct Event
{
    Micros time{0};
    EventKind kind = EventKind::tx_end;
    int connection = 0;
    std::uint64_t seq = 0;
    std::size_t sender = 0;
    std::uint64_t generation = 0;
    std::size_t tx = 0;

    [[nodiscard]] auto key() const { return std::tuple(time, static_cast<int>(kind), connection, seq); }
    bool operator>(const Event& other) const { return key() > other.key(); }
};

class Simulation
{
public:
    Simulation(const sched::ScheduleProblem& problem, const sched::Schedule& schedule, const SimConfig& config)
        : config_(config), aifs_(config.mac.aifs())
    {
        config_.mac.validate();
        if (config_.d_proc < Micros{0})
            throw InputError("receiver processing time must be non-negative");
        const auto space = sched::build_search_space(problem, config_.mac);
        sched::check_schedule(space, schedule);

        Micros total_duration{0};
        for (auto d : space.durations)
            total_duration += d;
        horizon_ = problem.epoch_start + *std::max_element(space.windows.begin(), space.windows.end()) +
                   10 * total_duration;

        for (std::size_t i = 0; i < problem.connections.size(); ++i)
        {
            const auto& c = problem.connections[i];
            SenderState s{.id = c.id,
                          .node = c.sender,
                          .receiver = c.receiver,
                          .airtime = c.packet_airtime,
                          .packets_remaining = c.packet_count,
                          .rng = RandomStream(derive_seed({config_.seed, static_cast<std::uint64_t>(c.id)}))};
            senders_.push_back(std::move(s));
            report_.connections.push_back({.id = c.id});
            receivers_.try_emplace(c.sender);
            receivers_.try_emplace(c.receiver);
            push({.time = problem.epoch_start + schedule.start_times[i], .kind = EventKind::access, .sender = i});
        }
    }

    SimReport run()
    {
        while (!queue_.empty())
        {
            const Micros now = queue_.top().time;
            if (now > horizon_)
                break;
            const EventKind kind = queue_.top().kind;
            std::vector<Event> batch;
            while (!queue_.empty() && queue_.top().time == now && queue_.top().kind == kind)
            {
                batch.push_back(queue_.top());
                queue_.pop();
            }
            switch (kind)
            {
            case EventKind::tx_end: on_tx_end(now, batch); break;
            case EventKind::access: on_access(now, batch); break;
            case EventKind::ready: on_ready(now, batch); break;
            }
        }
        return std::move(report_);
    }

private:
    void push(Event e)
    {
        e.connection = senders_[e.sender].id;
        e.seq = next_seq_++;
        queue_.push(e);
    }

    void trace(Micros t, TraceKind kind, std::size_t sender, std::string detail)
    {
        if (config_.record_trace)
            report_.trace.push_back({t, kind, senders_[sender].id, std::move(detail)});
    }

    [[nodiscard]] bool channel_busy() const { return !in_flight_.empty(); }

    void on_tx_end(Micros now, const std::vector<Event>& batch)
    {
        for (const auto& e : batch)
        {
            const Transmission& tx = txs_[e.tx];
            std::erase(in_flight_, e.tx);
            if (ended_at_ != now)
            {
                ended_at_ = now;
                ended_senders_.clear();
            }
            ended_senders_.push_back(tx.sender);
            finalize(now, tx);

            SenderState& s = senders_[tx.sender];
            if (--s.packets_remaining == 0)
            {
                s.phase = Phase::done;
                report_.connections[tx.sender].completion = now;
            }
            else
            {
                s.phase = Phase::waiting_for_start;
                push({.time = now, .kind = EventKind::access, .sender = tx.sender});
            }
        }
        if (!channel_busy())
            on_channel_idle(now);
    }

    void on_access(Micros now, const std::vector<Event>& batch)
    {
        for (const auto& e : batch)
        {
            SenderState& s = senders_[e.sender];
            ++s.packet;
            s.backoff_counter.reset();
            if (channel_busy())
            {
                enter_backoff(now, e.sender);
            }
            else if (ended_alongside_other(now, e.sender))
            {
                // Its own carrier and another sender's dropped together; the
                // sender resumes sensing on the tail of the other carrier.
                enter_backoff(now, e.sender);
                start_countdown(now, e.sender);
            }
            else
            {
                s.phase = Phase::sensing_aifs;
                s.sense_from = now;
                ++s.generation;
                push({.time = now + aifs_, .kind = EventKind::ready, .sender = e.sender, .generation = s.generation});
            }
        }
    }

    void on_ready(Micros now, const std::vector<Event>& batch)
    {
        std::vector<std::size_t> starting;
        for (const auto& e : batch)
        {
            const SenderState& s = senders_[e.sender];
            const bool waiting = s.phase == Phase::sensing_aifs || (s.phase == Phase::backoff && s.counting);
            if (waiting && s.generation == e.generation)
                starting.push_back(e.sender);
        }
        if (starting.empty())
            return;
        assert(!channel_busy());

        const bool was_idle = !channel_busy();
        const bool clash = starting.size() > 1 || !in_flight_.empty();
        for (std::size_t idx : starting)
        {
            SenderState& s = senders_[idx];
            s.phase = Phase::transmitting;
            s.counting = false;
            ++s.generation;
            const std::size_t tx_id = txs_.size();
            txs_.push_back({.sender = idx, .packet = s.packet, .start = now, .end = now + s.airtime});
            trace(now, TraceKind::start_tx, idx, "packet=" + std::to_string(s.packet));
            if (!clash)
                lock_receivers(now, tx_id);
            in_flight_.push_back(tx_id);
            push({.time = now + s.airtime, .kind = EventKind::tx_end, .sender = idx, .tx = tx_id});
        }
        if (clash)
            for (std::size_t tx_id : in_flight_)
                mark_collided(tx_id);
        if (was_idle)
            on_channel_busy(now);
    }

    void enter_backoff(Micros now, std::size_t idx)
    {
        SenderState& s = senders_[idx];
        if (!s.backoff_counter)
        {
            s.backoff_counter = static_cast<int>(s.rng.between(0, config_.mac.cw_min));
            ++report_.connections[idx].backoffs;
            trace(now, TraceKind::backoff_draw, idx, "slots=" + std::to_string(*s.backoff_counter));
        }
        s.phase = Phase::backoff;
        s.counting = false;
        ++s.generation;
    }

    void on_channel_idle(Micros now)
    {
        for (std::size_t i = 0; i < senders_.size(); ++i)
        {
            SenderState& s = senders_[i];
            if (s.phase == Phase::backoff)
                start_countdown(now, i);
        }
    }

    void start_countdown(Micros now, std::size_t idx)
    {
        SenderState& s = senders_[idx];
        s.counting = true;
        s.sense_from = now;
        ++s.generation;
        push({.time = now + aifs_ + *s.backoff_counter * config_.mac.slot_time,
              .kind = EventKind::ready,
              .sender = idx,
              .generation = s.generation});
    }

    [[nodiscard]] bool ended_alongside_other(Micros now, std::size_t idx) const
    {
        return ended_at_ == now && std::ranges::find(ended_senders_, idx) != ended_senders_.end() &&
               std::ranges::any_of(ended_senders_, [&](std::size_t s) { return s != idx; });
    }

    void on_channel_busy(Micros now)
    {
        for (std::size_t i = 0; i < senders_.size(); ++i)
        {
            SenderState& s = senders_[i];
            if (s.phase == Phase::sensing_aifs)
            {
                enter_backoff(now, i);
            }
            else if (s.phase == Phase::backoff && s.counting)
            {
                const Micros counted = now - (s.sense_from + aifs_);
                if (counted > Micros{0} && config_.mac.slot_time > Micros{0})
                {
                    const auto slots = static_cast<int>(counted / config_.mac.slot_time);
                    *s.backoff_counter -= std::min(*s.backoff_counter, slots);
                }
                s.counting = false;
                ++s.generation;
            }
        }
    }

    void lock_receivers(Micros now, std::size_t tx_id)
    {
        Transmission& tx = txs_[tx_id];
        const SenderState& from = senders_[tx.sender];

        for (std::size_t c = 0; c < senders_.size(); ++c)
        {
            const int node = senders_[c].receiver;
            if (node != from.node && receivers_.at(node).busy_until > now)
                tx.busy_arrivals.push_back(c);
        }
        tx.receiver_busy = receivers_.at(from.receiver).busy_until > now;

        // The receive unit cannot tell desired from undesired packets, so
        // every idle node in range locks on.
        for (auto& [node, rx] : receivers_)
        {
            if (node == from.node || rx.busy_until > now)
                continue;
            rx.busy_until = now + config_.d_proc;
            rx.locked_on = tx_id;
        }
    }

    void mark_collided(std::size_t tx_id)
    {
        Transmission& tx = txs_[tx_id];
        if (tx.collided)
            return;
        tx.collided = true;
        for (auto& [node, rx] : receivers_)
        {
            if (rx.locked_on == tx_id)
            {
                rx.busy_until = tx.start;
                rx.locked_on.reset();
            }
        }
    }

    void finalize(Micros now, const Transmission& tx)
    {
        ConnectionReport& row = report_.connections[tx.sender];
        const SenderState& s = senders_[tx.sender];
        ++row.sent;
        const std::string packet = "packet=" + std::to_string(tx.packet);
        trace(now, TraceKind::end_tx, tx.sender, packet);
        if (tx.collided)
        {
            ++row.collided;
            trace(now, TraceKind::collision, tx.sender, packet);
            return;
        }
        for (std::size_t c : tx.busy_arrivals)
            ++report_.connections[c].mmp_count;
        if (tx.receiver_busy)
        {
            ++row.mmp_lost;
            trace(now, TraceKind::mmp, tx.sender, packet + " receiver=" + std::to_string(s.receiver));
        }
        else
        {
            ++row.delivered;
            trace(now, TraceKind::delivery, tx.sender, packet + " receiver=" + std::to_string(s.receiver));
        }
    }

    SimConfig config_;
    Micros aifs_;
    Micros horizon_{0};
    std::vector<SenderState> senders_;
    std::map<int, ReceiverState> receivers_;
    std::vector<Transmission> txs_;
    std::vector<std::size_t> in_flight_;
    Micros ended_at_{-1};
    std::vector<std::size_t> ended_senders_;
    std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
    std::uint64_t next_seq_ = 0;
    SimReport report_;
};

} // namespace

SimReport run_simulation(const sched::ScheduleProblem& problem, const sched::Schedule& schedule,
                         const SimConfig& config)
{
    return Simulation(problem, schedule, config).run();
}

std::vector<DeadlineCheck> completion_times(const SimReport& report, const sched::ScheduleProblem& problem)
{
    if (report.connections.size() != problem.connections.size())
        throw DomainError("report and problem describe different connection sets");
    std::vector<DeadlineCheck> out;
    out.reserve(report.connections.size());
    for (std::size_t i = 0; i < report.connections.size(); ++i)
    {
        const auto& row = report.connections[i];
        const bool met = row.completion && *row.completion <= problem.connections[i].deadline;
        out.push_back({row.id, met, row.completion});
    }
    return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceEvent>& trace)
{
    out << "time_us,event,connection,detail\n";
    for (const auto& e : trace)
        out << e.time.count() << ',' << to_string(e.event) << ',' << e.connection << ',' << e.detail << '\n';
}

} // namespace linksched::sim

namespace linksched {

void MacTiming::validate() const
{
    if (aifsn < 2)
        throw InputError("AIFSN must be at least 2");
    if (cw_min < 0)
        throw InputError("CWmin must be non-negative");
    if (slot_time < Micros{0} || sifs_time < Micros{0})
        throw InputError("slot time and SIFS must be non-negative");
    if (aifs() <= Micros{0})
        throw InputError("AIFS must be positive");
}

} // namespace linksched
