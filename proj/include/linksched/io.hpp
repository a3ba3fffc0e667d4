#pragma once

#include "linksched/harness.hpp"
#include "linksched/mac.hpp"
#include "linksched/prob.hpp"
#include "linksched/sched.hpp"
#include "linksched/sim.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace linksched::io {

using Json = nlohmann::json;

/// Reads and parses a JSON file. Throws InputError with the path and the
/// line/column of a syntax error.
Json load_json_file(const std::filesystem::path& path);
Json parse_json_text(const std::string& text, const std::string& origin);

/// Optional "mac" object: slot_us, sifs_us, aifsn, cw_min.
MacTiming mac_from_json(const Json& doc, MacTiming defaults = {});

/// A problem file plus the optional MAC block and d_proc it may carry.
struct ProblemDocument
{
    sched::ScheduleProblem problem;
    MacTiming mac;
    std::optional<Micros> d_proc;
};

/// {epoch_start_s, delta_s, tau_s, connections: [{id, sender, receiver,
/// packet_count, packet_airtime_us, deadline_s}], mac?, d_proc_us?}
ProblemDocument problem_from_json(const Json& doc);
Json problem_to_json(const sched::ScheduleProblem& problem);

/// {start_times_s: [...], cost_s}
Json schedule_to_json(const sched::Schedule& schedule);
sched::Schedule schedule_from_json(const Json& doc);
/// connection,start_s,end_s with absolute times.
void write_schedule_csv(std::ostream& out, const sched::ScheduleProblem& problem, const sched::SearchSpace& space,
                        const sched::Schedule& schedule);
void write_schedule_text(std::ostream& out, const sched::ScheduleProblem& problem, const sched::SearchSpace& space,
                         const sched::Schedule& schedule);

Json report_to_json(const sim::SimReport& report, const sched::ScheduleProblem& problem);
/// connection,sent,delivered,collided,mmp,mmp_lost,backoffs,completion_s,met_deadline plus an ALL row.
void write_report_csv(std::ostream& out, const sim::SimReport& report, const sched::ScheduleProblem& problem);
void write_report_text(std::ostream& out, const sim::SimReport& report, const sched::ScheduleProblem& problem);

Json probability_table_to_json(const std::vector<prob::ProbabilityRow>& rows, unsigned digits);
/// n,p_free,p_collision
void write_probability_csv(std::ostream& out, const std::vector<prob::ProbabilityRow>& rows, unsigned digits);
void write_probability_text(std::ostream& out, const std::vector<prob::ProbabilityRow>& rows, unsigned digits);

/// Sweep scenario file. Windows come from "windows_s" or from
/// "default_windows": {count, include_s}; seeds from "seeds" or "seed_count".
harness::SweepSpec sweep_spec_from_json(const Json& doc);

Json sweep_result_to_json(const harness::SweepResult& result);
harness::SweepResult sweep_result_from_json(const Json& doc);
/// window_s,strategy,connection,sent,delivered,collided,mmp,completion_s
void write_sweep_csv(std::ostream& out, const harness::SweepResult& result);

Json comparison_to_json(const harness::Comparison& comparison);
void write_comparison_csv(std::ostream& out, const harness::Comparison& comparison);

/// Canonical text form: sorted keys, two-space indent, trailing newline.
std::string canonical(const Json& doc);

/// Writes `text` to `path`; throws DomainError naming the path on failure.
void write_file(const std::filesystem::path& path, const std::string& text);

} // namespace linksched::io
