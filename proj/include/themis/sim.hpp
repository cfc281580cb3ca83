#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "themis/policy.hpp"
#include "themis/table.hpp"

namespace themis {

enum class SchedulerKind { themis, fifo, gift, tbf };

const char* scheduler_kind_name(SchedulerKind k);
SchedulerKind scheduler_kind_from_string(const std::string& s);

enum class WorkloadPattern {
    write_read_cycle, // write file_mb, read it back, repeat
    iops_stat,        // metadata-only stat storm
    iops_write_read,  // write a small file once, then read it repeatedly
};

struct WorkloadSpec {
    std::string job_id;
    std::string user_id;
    std::string group_id;
    int node_count = 1;
    double priority_weight = 1.0;
    int procs_per_node = 8;
    WorkloadPattern pattern = WorkloadPattern::write_read_cycle;
    double file_mb = 10.0;
    // > 0: each process stops after moving this many MB (fixed workload);
    // otherwise the job runs for run_length_s.
    double total_mb_per_proc = 0.0;
    double start_offset_s = 0.0;
    double run_length_s = 0.0;
    // Explicit server placement for this job's files; empty = use the
    // configured placement mode.
    std::vector<int> servers;
};

struct SimConfig {
    int n_servers = 1;
    int workers_per_server = 8;
    double per_worker_bandwidth = 2.5e9; // bytes/s
    SimTime per_request_overhead = 10;   // µs
    SchedulerKind scheduler = SchedulerKind::themis;
    std::string policy_text = "job-fair";
    SimTime lambda = 500'000;             // table sync interval, µs
    SimTime heartbeat_interval = 1'000'000;
    SimTime heartbeat_timeout = 10'000'000;
    std::uint64_t seed = 1;
    double duration_s = 60.0; // 0 = run until all fixed workloads finish
    enum class Placement { all_servers, hash_disjoint } placement = Placement::all_servers;
    double request_mb = 1.0;     // I/O granularity; also the stripe size
    SimTime gift_mu = 500'000;
    SimTime tbf_refill_period = 100'000;
    double tbf_rate = 0.0; // tokens/s per job; 0 = auto (80% of capacity split over jobs)
    double tbf_cap = 0.0;  // 0 = auto (half a second of tokens)
    bool record_trace = false;
    std::vector<WorkloadSpec> jobs;

    void validate() const; // throws ParseError on bad fields
};

struct CompletionRecord {
    std::uint64_t request_id = 0;
    std::string job_id;
    std::string kind;
    std::uint64_t bytes = 0;
    SimTime arrival_time = 0;
    SimTime dispatch_time = 0;
    SimTime completion_time = 0;
};

struct JobWindow {
    double bytes = 0.0;
    std::uint64_t ops = 0;
};

// Windowed per-job output of a run, plus fairness diagnostics.
struct Metrics {
    SimTime window = 1'000'000; // 1 s
    std::vector<std::map<std::string, JobWindow>> windows;
    std::map<std::string, double> total_bytes;
    std::map<std::string, std::uint64_t> total_ops;
    std::map<std::string, std::string> job_user;
    std::map<std::string, std::string> job_group;
    // Completion time of each fixed (total_mb_per_proc) workload.
    std::map<std::string, SimTime> job_completion;
    SimTime end_time = 0;
    // Longest span during which some server's token assignment differed
    // from the merged-table assignment (themis scheduler only).
    SimTime max_assignment_divergence = 0;
    // When the last such span ended.
    SimTime global_fairness_time = 0;
    std::vector<CompletionRecord> trace; // only when record_trace

    double bytes_in(const std::string& job, double from_s, double to_s) const;
    double user_bytes_in(const std::string& user, double from_s, double to_s) const;
    double group_bytes_in(const std::string& group, double from_s, double to_s) const;
    double total_bytes_all() const;
    std::uint64_t ops_in(const std::string& job, double from_s, double to_s) const;
    // Standard deviation of the job's per-window share of bytes (windows
    // fully inside [from_s, to_s) with any traffic).
    double share_std(const std::string& job, double from_s, double to_s) const;

    std::string windows_csv() const;
    std::string summary_csv() const;
    std::string trace_csv() const;
};

Metrics run_simulation(const SimConfig& config);

// Windowed aggregation of a completed dispatch trace; same accumulation
// the simulator performs online.
Metrics collect_metrics(const std::vector<CompletionRecord>& trace, SimTime end_time);

} // namespace themis
