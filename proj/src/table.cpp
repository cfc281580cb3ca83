#include "themis/table.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "themis/error.hpp"

namespace themis {

void JobStatusTable::check_immutable(const JobInfo& existing, const JobInfo& incoming) const {
    if (existing.user_id != incoming.user_id || existing.group_id != incoming.group_id ||
        existing.node_count != incoming.node_count) {
        throw IntegrityError("job '" + incoming.job_id +
                             "' reported with conflicting immutable attributes");
    }
}

void JobStatusTable::apply_heartbeat(const JobInfo& job, SimTime now) {
    if (job.node_count < 1) {
        throw IntegrityError("job '" + job.job_id + "' has node_count < 1");
    }
    auto it = entries_.find(job.job_id);
    if (it != entries_.end()) {
        check_immutable(it->second, job);
        it->second.status = JobStatus::active;
        it->second.last_heartbeat = now;
        it->second.priority_weight = job.priority_weight;
    } else {
        JobInfo e = job;
        e.status = JobStatus::active;
        e.last_heartbeat = now;
        entries_.emplace(e.job_id, std::move(e));
    }
    ++epoch_;
}

void JobStatusTable::expire_inactive(SimTime now, SimTime timeout) {
    bool changed = false;
    for (auto& [id, job] : entries_) {
        if (job.status == JobStatus::active && now - job.last_heartbeat > timeout) {
            job.status = JobStatus::inactive;
            changed = true;
        }
    }
    if (changed) ++epoch_;
}

const JobInfo* JobStatusTable::find(const std::string& job_id) const {
    auto it = entries_.find(job_id);
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const JobInfo*> JobStatusTable::active_jobs() const {
    std::vector<const JobInfo*> out;
    for (const auto& [id, job] : entries_) {
        if (job.status == JobStatus::active) out.push_back(&job);
    }
    return out;
}

void JobStatusTable::insert_raw(const JobInfo& job) {
    auto it = entries_.find(job.job_id);
    if (it != entries_.end()) {
        check_immutable(it->second, job);
        it->second = job;
    } else {
        entries_.emplace(job.job_id, job);
    }
}

JobStatusTable merge_tables(const std::vector<JobStatusTable>& tables) {
    if (tables.empty()) throw EmptyError("merge_tables: no input tables");
    JobStatusTable out;
    std::uint64_t max_epoch = 0;
    for (const auto& t : tables) {
        max_epoch = std::max(max_epoch, t.epoch());
        for (const auto& [id, job] : t.entries()) {
            const JobInfo* cur = out.find(id);
            if (!cur) {
                out.insert_raw(job);
                continue;
            }
            // Latest heartbeat wins; active in any input keeps it active.
            JobInfo merged = job.last_heartbeat >= cur->last_heartbeat ? job : *cur;
            if (cur->status == JobStatus::active || job.status == JobStatus::active) {
                merged.status = JobStatus::active;
            }
            out.insert_raw(merged);
        }
    }
    out.set_epoch(max_epoch + 1);
    return out;
}

JobStatusTable JobStatusTable::from_text(std::istream& in) {
    JobStatusTable t;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        JobInfo job;
        std::string status;
        if (!(ls >> job.job_id)) continue; // blank line
        if (!(ls >> job.user_id >> job.group_id >> job.node_count >> job.priority_weight >>
              status >> job.last_heartbeat)) {
            throw ParseError("job table line " + std::to_string(lineno) + ": expected 7 fields");
        }
        if (status == "active") {
            job.status = JobStatus::active;
        } else if (status == "inactive") {
            job.status = JobStatus::inactive;
        } else {
            throw ParseError("job table line " + std::to_string(lineno) + ": bad status '" +
                             status + "'");
        }
        if (t.find(job.job_id)) {
            throw ParseError("job table line " + std::to_string(lineno) + ": duplicate job id '" +
                             job.job_id + "'");
        }
        if (job.node_count < 1 || job.priority_weight <= 0) {
            throw ParseError("job table line " + std::to_string(lineno) +
                             ": node_count/priority out of range");
        }
        t.insert_raw(job);
    }
    t.set_epoch(1);
    return t;
}

void JobStatusTable::to_text(std::ostream& out) const {
    for (const auto& [id, job] : entries_) {
        out << job.job_id << ' ' << job.user_id << ' ' << job.group_id << ' ' << job.node_count
            << ' ' << job.priority_weight << ' '
            << (job.status == JobStatus::active ? "active" : "inactive") << ' '
            << job.last_heartbeat << '\n';
    }
}

} // namespace themis
