#include "themis/sim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

#include "themis/baselines.hpp"
#include "themis/error.hpp"
#include "themis/filestore.hpp"
#include "themis/queue.hpp"
#include "themis/rng.hpp"

namespace themis {

const char* scheduler_kind_name(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::themis: return "themis";
        case SchedulerKind::fifo: return "fifo";
        case SchedulerKind::gift: return "gift";
        case SchedulerKind::tbf: return "tbf";
    }
    return "?";
}

SchedulerKind scheduler_kind_from_string(const std::string& s) {
    if (s == "themis") return SchedulerKind::themis;
    if (s == "fifo") return SchedulerKind::fifo;
    if (s == "gift") return SchedulerKind::gift;
    if (s == "tbf") return SchedulerKind::tbf;
    throw ParseError("unknown scheduler '" + s + "'");
}

void SimConfig::validate() const {
    if (n_servers < 1) throw ParseError("n_servers must be >= 1");
    if (workers_per_server < 1) throw ParseError("workers_per_server must be >= 1");
    if (per_worker_bandwidth <= 0) throw ParseError("per_worker_bandwidth must be positive");
    if (per_request_overhead < 0) throw ParseError("per_request_overhead must be >= 0");
    if (lambda <= 0 || heartbeat_interval <= 0 || heartbeat_timeout <= 0) {
        throw ParseError("intervals must be positive");
    }
    if (request_mb <= 0) throw ParseError("request_mb must be positive");
    if (jobs.empty()) throw ParseError("no jobs configured");
    if (scheduler == SchedulerKind::themis) parse_policy(policy_text);
    for (const WorkloadSpec& j : jobs) {
        if (j.job_id.empty()) throw ParseError("job with empty id");
        if (j.node_count < 1) throw ParseError("job '" + j.job_id + "': node_count must be >= 1");
        if (j.priority_weight <= 0) {
            throw ParseError("job '" + j.job_id + "': priority_weight must be positive");
        }
        if (j.procs_per_node < 1) {
            throw ParseError("job '" + j.job_id + "': procs_per_node must be >= 1");
        }
        if (j.file_mb <= 0 && j.pattern != WorkloadPattern::iops_stat) {
            throw ParseError("job '" + j.job_id + "': file_mb must be positive");
        }
        if (j.run_length_s <= 0 && j.total_mb_per_proc <= 0 && duration_s <= 0) {
            throw ParseError("job '" + j.job_id + "': needs run_length_s or total_mb_per_proc");
        }
        for (int s : j.servers) {
            if (s < 0 || s >= n_servers) {
                throw ParseError("job '" + j.job_id + "': server id out of range");
            }
        }
        std::size_t count = 0;
        for (const WorkloadSpec& other : jobs) {
            if (other.job_id == j.job_id) ++count;
        }
        if (count != 1) throw ParseError("duplicate job id '" + j.job_id + "'");
    }
    if (duration_s <= 0) {
        for (const WorkloadSpec& j : jobs) {
            if (j.total_mb_per_proc <= 0) {
                throw ParseError("duration_s = 0 requires fixed workloads for every job");
            }
        }
    }
}

namespace {

constexpr std::uint64_t kMB = 1 << 20;

enum class EvType { job_start, heartbeat, sync, refill, housekeeping, completion };

struct Event {
    SimTime t = 0;
    std::uint64_t seq = 0;
    EvType type = EvType::job_start;
    int job = -1;
    int server = -1;
    SimTime dispatch = 0;
    IORequest req;
};

struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
        if (a.t != b.t) return a.t > b.t;
        return a.seq > b.seq;
    }
};

struct ProcState {
    int job = 0;
    std::string path;
    std::vector<int> route; // server per chunk, indexed modulo
    enum class Phase { writing, reading } phase = Phase::writing;
    std::uint64_t pos = 0; // byte position within the current pass
    std::uint64_t chunk_counter = 0;
    double moved_bytes = 0.0;
    bool done = false;
};

struct JobState {
    WorkloadSpec spec;
    SimTime start = 0;
    SimTime stop = 0; // 0 = no time limit (fixed workload)
    std::vector<int> procs;
    std::vector<int> touched_servers;
    int procs_running = 0;
    bool started = false;
    double budget_bytes = 0.0;
    std::uint64_t file_bytes = 0;
};

struct ServerState {
    int id = 0;
    QueueSet qs;
    JobStatusTable table;
    TokenAssignment assignment;
    bool have_assignment = false;
    std::unique_ptr<GiftScheduler> gift;
    std::unique_ptr<TbfScheduler> tbf;
    int free_workers = 0;
};

class Simulator {
public:
    explicit Simulator(const SimConfig& cfg)
        : cfg_(cfg), ring_(cfg.n_servers), rng_(cfg.seed) {
        if (cfg_.scheduler == SchedulerKind::themis) policy_ = parse_policy(cfg_.policy_text);
        request_bytes_ = static_cast<std::uint64_t>(cfg_.request_mb * static_cast<double>(kMB));
        double svc_s = static_cast<double>(cfg_.per_request_overhead) * 1e-6 +
                       static_cast<double>(request_bytes_) / cfg_.per_worker_bandwidth;
        server_capacity_rps_ = static_cast<double>(cfg_.workers_per_server) / svc_s;
        setup();
    }

    Metrics run();

private:
    void setup();
    void schedule(Event ev) {
        ev.seq = next_seq_++;
        events_.push(std::move(ev));
    }
    void start_job(int job, SimTime now);
    void heartbeat(int job, SimTime now);
    void issue_next(int proc, SimTime now);
    void on_completion(ServerState& sv, const Event& ev, SimTime now);
    void try_dispatch(ServerState& sv, SimTime now);
    void sync_tables(SimTime now);
    void housekeeping(SimTime now);
    void check_convergence(SimTime now);
    SimTime service_time(const IORequest& req) const;
    int route_of(ProcState& p) const;
    bool job_time_over(const JobState& j, SimTime now) const {
        return j.stop > 0 && now >= j.stop;
    }
    // Periodic events stop rescheduling once a duration-less run has no
    // live procs and no work in flight, so the event loop can drain.
    bool periodic_alive() const {
        if (end_limit_ > 0) return true;
        if (!req_proc_.empty()) return true;
        for (const JobState& j : jobs_) {
            if (j.procs_running > 0) return true;
        }
        return false;
    }

    SimConfig cfg_;
    PolicySpec policy_;
    HashRing ring_;
    Rng rng_;
    std::uint64_t request_bytes_ = kMB;
    double server_capacity_rps_ = 0.0;

    std::vector<ServerState> servers_;
    std::vector<JobState> jobs_;
    std::vector<ProcState> procs_;
    std::priority_queue<Event, std::vector<Event>, EventOrder> events_;
    std::uint64_t next_seq_ = 0;
    std::uint64_t next_request_id_ = 0;
    std::map<std::uint64_t, int> req_proc_; // request id -> issuing proc
    SimTime end_limit_ = 0; // 0 = run to exhaustion
    SimTime now_ = 0;

    Metrics metrics_;
    std::optional<SimTime> diverged_since_;
};

void Simulator::setup() {
    servers_.resize(static_cast<std::size_t>(cfg_.n_servers));
    double tbf_rate = cfg_.tbf_rate;
    if (cfg_.scheduler == SchedulerKind::tbf && tbf_rate <= 0) {
        // Aggregate token rate at 80% of server capacity, split over the
        // declared jobs; this keeps TBF rate-limited under saturation.
        tbf_rate = 0.8 * server_capacity_rps_ / static_cast<double>(cfg_.jobs.size());
    }
    double tbf_cap = cfg_.tbf_cap > 0 ? cfg_.tbf_cap : tbf_rate * 0.5;
    for (int s = 0; s < cfg_.n_servers; ++s) {
        servers_[s].id = s;
        servers_[s].free_workers = cfg_.workers_per_server;
        if (cfg_.scheduler == SchedulerKind::gift) {
            servers_[s].gift = std::make_unique<GiftScheduler>(cfg_.gift_mu);
        }
        if (cfg_.scheduler == SchedulerKind::tbf) {
            servers_[s].tbf = std::make_unique<TbfScheduler>(tbf_rate, tbf_cap);
            for (const WorkloadSpec& j : cfg_.jobs) servers_[s].tbf->register_job(j.job_id);
            schedule({cfg_.tbf_refill_period, 0, EvType::refill, -1, s, {}});
        }
    }

    end_limit_ = cfg_.duration_s > 0
                     ? static_cast<SimTime>(cfg_.duration_s * 1e6)
                     : 0;

    for (std::size_t j = 0; j < cfg_.jobs.size(); ++j) {
        const WorkloadSpec& spec = cfg_.jobs[j];
        JobState js;
        js.spec = spec;
        js.start = static_cast<SimTime>(spec.start_offset_s * 1e6);
        js.stop = spec.run_length_s > 0 ? js.start + static_cast<SimTime>(spec.run_length_s * 1e6)
                                        : 0;
        js.budget_bytes = spec.total_mb_per_proc * static_cast<double>(kMB);
        js.file_bytes = static_cast<std::uint64_t>(spec.file_mb * static_cast<double>(kMB));
        int n_procs = spec.node_count * spec.procs_per_node;
        std::vector<bool> touched(static_cast<std::size_t>(cfg_.n_servers), false);
        for (int p = 0; p < n_procs; ++p) {
            ProcState ps;
            ps.job = static_cast<int>(j);
            ps.path = "/fs/" + spec.job_id + "/p" + std::to_string(p) + ".dat";
            if (!spec.servers.empty()) {
                ps.route = spec.servers;
            } else if (cfg_.placement == SimConfig::Placement::hash_disjoint) {
                ps.route = {ring_.owner(ps.path)};
            } else {
                ps.route = ring_.place(ps.path, cfg_.n_servers);
            }
            for (int s : ps.route) touched[static_cast<std::size_t>(s)] = true;
            js.procs.push_back(static_cast<int>(procs_.size()));
            procs_.push_back(std::move(ps));
        }
        for (int s = 0; s < cfg_.n_servers; ++s) {
            if (touched[static_cast<std::size_t>(s)]) js.touched_servers.push_back(s);
        }
        js.procs_running = n_procs;
        metrics_.job_user[spec.job_id] = spec.user_id;
        metrics_.job_group[spec.job_id] = spec.group_id;
        metrics_.total_bytes[spec.job_id] = 0.0;
        schedule({js.start, 0, EvType::job_start, static_cast<int>(j), -1, {}});
        jobs_.push_back(std::move(js));
    }

    if (cfg_.n_servers > 1) {
        schedule({cfg_.lambda, 0, EvType::sync, -1, -1, {}});
    }
    schedule({cfg_.heartbeat_interval, 0, EvType::housekeeping, -1, -1, {}});
}

SimTime Simulator::service_time(const IORequest& req) const {
    double transfer_us = static_cast<double>(req.length) * 1e6 / cfg_.per_worker_bandwidth;
    return cfg_.per_request_overhead + static_cast<SimTime>(std::llround(transfer_us));
}

int Simulator::route_of(ProcState& p) const {
    return p.route[p.chunk_counter % p.route.size()];
}

void Simulator::start_job(int job, SimTime now) {
    JobState& js = jobs_[job];
    js.started = true;
    heartbeat(job, now);
    for (int p : js.procs) issue_next(p, now);
}

void Simulator::heartbeat(int job, SimTime now) {
    JobState& js = jobs_[job];
    if (job_time_over(js, now) || js.procs_running == 0) return;
    JobInfo info;
    info.job_id = js.spec.job_id;
    info.user_id = js.spec.user_id;
    info.group_id = js.spec.group_id;
    info.node_count = js.spec.node_count;
    info.priority_weight = js.spec.priority_weight;
    for (int s : js.touched_servers) {
        servers_[s].table.apply_heartbeat(info, now);
    }
    check_convergence(now);
    schedule({now + cfg_.heartbeat_interval, 0, EvType::heartbeat, job, -1, {}});
}

void Simulator::issue_next(int proc, SimTime now) {
    ProcState& p = procs_[proc];
    JobState& js = jobs_[p.job];
    if (p.done) return;
    bool budget_done = js.budget_bytes > 0 && p.moved_bytes >= js.budget_bytes;
    if (budget_done || job_time_over(js, now) || (end_limit_ > 0 && now >= end_limit_)) {
        p.done = true;
        if (--js.procs_running == 0 && js.budget_bytes > 0) {
            metrics_.job_completion[js.spec.job_id] = now;
        }
        return;
    }

    IORequest req;
    req.request_id = next_request_id_++;
    req.job_id = js.spec.job_id;
    req.user_id = js.spec.user_id;
    req.group_id = js.spec.group_id;
    req.arrival_time = now;

    int server;
    if (js.spec.pattern == WorkloadPattern::iops_stat) {
        req.kind = RequestKind::stat;
        req.path = p.path + "." + std::to_string(p.chunk_counter);
        req.length = 0;
        server = p.route[p.chunk_counter % p.route.size()];
        ++p.chunk_counter;
    } else {
        // write_read_cycle: write the file, read it back, repeat.
        // iops_write_read: write the file once, then read it repeatedly.
        req.path = p.path;
        req.offset = p.pos;
        req.length = std::min<std::uint64_t>(request_bytes_, js.file_bytes - p.pos);
        req.kind = p.phase == ProcState::Phase::writing ? RequestKind::write : RequestKind::read;
        server = route_of(p);
        ++p.chunk_counter;
        p.pos += req.length;
        if (p.pos >= js.file_bytes) {
            p.pos = 0;
            if (p.phase == ProcState::Phase::writing) {
                p.phase = ProcState::Phase::reading;
            } else if (js.spec.pattern == WorkloadPattern::write_read_cycle) {
                p.phase = ProcState::Phase::writing;
            }
        }
    }

    req_proc_[req.request_id] = proc;
    ServerState& sv = servers_[server];
    sv.qs.enqueue(std::move(req));
    try_dispatch(sv, now);
}

void Simulator::try_dispatch(ServerState& sv, SimTime now) {
    while (sv.free_workers > 0 && !sv.qs.empty()) {
        IORequest req;
        switch (cfg_.scheduler) {
            case SchedulerKind::themis: {
                if (!sv.have_assignment || sv.assignment.source_epoch != sv.table.epoch()) {
                    try {
                        sv.assignment = compute_assignment(policy_, sv.table);
                        sv.have_assignment = true;
                    } catch (const EmptyError&) {
                        sv.assignment = {};
                        sv.assignment.source_epoch = sv.table.epoch();
                        sv.have_assignment = true;
                    }
                }
                req = sv.qs.next_request(sv.assignment, rng_);
                break;
            }
            case SchedulerKind::fifo:
                req = sv.qs.fifo_next();
                break;
            case SchedulerKind::gift:
                sv.gift->recompute(sv.qs, now);
                req = sv.gift->next(sv.qs);
                break;
            case SchedulerKind::tbf: {
                std::optional<IORequest> r = sv.tbf->next(sv.qs);
                if (!r) return; // throttled until the next refill
                req = std::move(*r);
                break;
            }
        }
        --sv.free_workers;
        SimTime done = now + service_time(req);
        Event ev;
        ev.t = done;
        ev.type = EvType::completion;
        ev.server = sv.id;
        ev.dispatch = now;
        ev.req = std::move(req);
        ev.req.completion_time = done;
        schedule(std::move(ev));
    }
}

void Simulator::on_completion(ServerState& sv, const Event& ev, SimTime now) {
    ++sv.free_workers;
    const IORequest& req = ev.req;

    std::size_t w = static_cast<std::size_t>(now / metrics_.window);
    if (w >= metrics_.windows.size()) metrics_.windows.resize(w + 1);
    JobWindow& jw = metrics_.windows[w][req.job_id];
    jw.bytes += static_cast<double>(req.length);
    jw.ops += 1;
    metrics_.total_bytes[req.job_id] += static_cast<double>(req.length);
    metrics_.total_ops[req.job_id] += 1;
    if (cfg_.record_trace) {
        metrics_.trace.push_back({req.request_id, req.job_id, request_kind_name(req.kind),
                                  req.length, req.arrival_time, ev.dispatch, now});
    }

    // Synchronous clients: the issuing proc gets the result and immediately
    // issues its next request.
    auto it = req_proc_.find(req.request_id);
    int proc = it->second;
    req_proc_.erase(it);
    ProcState& p = procs_[proc];
    p.moved_bytes += static_cast<double>(req.length);
    issue_next(proc, now);
    try_dispatch(sv, now);
}

void Simulator::sync_tables(SimTime now) {
    // All-gather: every server's table becomes the merged table; modeled as
    // instantaneous at the sync tick.
    std::vector<JobStatusTable> tabs;
    tabs.reserve(servers_.size());
    std::uint64_t max_epoch = 0;
    for (ServerState& sv : servers_) {
        tabs.push_back(sv.table);
        max_epoch = std::max(max_epoch, sv.table.epoch());
    }
    JobStatusTable merged = merge_tables(tabs);
    for (ServerState& sv : servers_) {
        sv.table = merged;
        // Keep every server's epoch strictly increasing.
        sv.table.set_epoch(max_epoch + 1);
        sv.have_assignment = false;
    }
    check_convergence(now);
    if (periodic_alive()) schedule({now + cfg_.lambda, 0, EvType::sync, -1, -1, {}});
}

void Simulator::housekeeping(SimTime now) {
    bool changed = false;
    for (ServerState& sv : servers_) {
        std::uint64_t before = sv.table.epoch();
        sv.table.expire_inactive(now, cfg_.heartbeat_timeout);
        if (sv.table.epoch() != before) changed = true;
    }
    if (changed) check_convergence(now);
    if (periodic_alive()) {
        schedule({now + cfg_.heartbeat_interval, 0, EvType::housekeeping, -1, -1, {}});
    }
}

void Simulator::check_convergence(SimTime now) {
    if (cfg_.scheduler != SchedulerKind::themis || cfg_.n_servers < 2) return;

    std::vector<JobStatusTable> tabs;
    tabs.reserve(servers_.size());
    for (ServerState& sv : servers_) tabs.push_back(sv.table);
    JobStatusTable merged = merge_tables(tabs);

    bool have_ref = true;
    TokenAssignment ref;
    try {
        ref = compute_assignment(policy_, merged);
    } catch (const EmptyError&) {
        have_ref = false;
    }

    bool all_match = true;
    for (ServerState& sv : servers_) {
        TokenAssignment local;
        bool have_local = true;
        try {
            local = compute_assignment(policy_, sv.table);
        } catch (const EmptyError&) {
            have_local = false;
        }
        if (have_local != have_ref) {
            all_match = false;
            break;
        }
        if (!have_ref) continue;
        if (local.probabilities.size() != ref.probabilities.size()) {
            all_match = false;
            break;
        }
        for (const auto& [job, p] : ref.probabilities) {
            auto lit = local.probabilities.find(job);
            if (lit == local.probabilities.end() || std::abs(lit->second - p) > 1e-9) {
                all_match = false;
                break;
            }
        }
        if (!all_match) break;
    }

    if (!all_match && !diverged_since_) {
        diverged_since_ = now;
    } else if (all_match && diverged_since_) {
        metrics_.max_assignment_divergence =
            std::max(metrics_.max_assignment_divergence, now - *diverged_since_);
        metrics_.global_fairness_time = now;
        diverged_since_.reset();
    }
}

Metrics Simulator::run() {
    while (!events_.empty()) {
        Event ev = events_.top();
        events_.pop();
        if (end_limit_ > 0 && ev.t > end_limit_) break;
        now_ = ev.t;
        switch (ev.type) {
            case EvType::job_start: start_job(ev.job, now_); break;
            case EvType::heartbeat: heartbeat(ev.job, now_); break;
            case EvType::sync: sync_tables(now_); break;
            case EvType::refill: {
                ServerState& sv = servers_[ev.server];
                sv.tbf->refill(cfg_.tbf_refill_period, sv.qs);
                try_dispatch(sv, now_);
                if (periodic_alive()) {
                    schedule({now_ + cfg_.tbf_refill_period, 0, EvType::refill, -1, ev.server, {}});
                }
                break;
            }
            case EvType::housekeeping: housekeeping(now_); break;
            case EvType::completion:
                on_completion(servers_[ev.server], ev, now_);
                break;
        }
    }
    metrics_.end_time = end_limit_ > 0 ? end_limit_ : now_;
    if (diverged_since_) {
        metrics_.max_assignment_divergence = std::max(
            metrics_.max_assignment_divergence, metrics_.end_time - *diverged_since_);
        metrics_.global_fairness_time = metrics_.end_time;
    }
    return std::move(metrics_);
}

} // namespace

Metrics run_simulation(const SimConfig& config) {
    config.validate();
    Simulator sim(config);
    return sim.run();
}

} // namespace themis
