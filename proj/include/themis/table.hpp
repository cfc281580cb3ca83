#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace themis {

// Simulation time in microseconds.
using SimTime = std::int64_t;

enum class JobStatus { active, inactive };

struct JobInfo {
    std::string job_id;
    std::string user_id;
    std::string group_id;
    int node_count = 1;
    double priority_weight = 1.0;
    JobStatus status = JobStatus::active;
    SimTime last_heartbeat = 0;
};

// Per-server registry of known jobs. Value semantics throughout; every
// mutation bumps the epoch so downstream token assignments can tell
// whether they are stale.
class JobStatusTable {
public:
    JobStatusTable() = default;

    // Insert or refresh a job entry from a heartbeat. The entry becomes
    // active and last_heartbeat is set to `now`. Throws IntegrityError if
    // the job is already known with different immutable attributes
    // (user, group, node count).
    void apply_heartbeat(const JobInfo& job, SimTime now);

    // Mark every active job whose last heartbeat is older than `timeout`
    // as inactive. Epoch is bumped only if something changed.
    void expire_inactive(SimTime now, SimTime timeout);

    const JobInfo* find(const std::string& job_id) const;
    const std::map<std::string, JobInfo>& entries() const { return entries_; }
    std::uint64_t epoch() const { return epoch_; }

    std::vector<const JobInfo*> active_jobs() const;
    std::size_t size() const { return entries_.size(); }

    // Line-oriented text form, one job per line:
    //   job_id user_id group_id node_count priority_weight status last_heartbeat
    // '#' starts a comment.
    static JobStatusTable from_text(std::istream& in);
    void to_text(std::ostream& out) const;

    // Used by merge; validates immutable attributes like apply_heartbeat.
    void insert_raw(const JobInfo& job);
    void set_epoch(std::uint64_t e) { epoch_ = e; }

private:
    void check_immutable(const JobInfo& existing, const JobInfo& incoming) const;

    std::map<std::string, JobInfo> entries_;
    std::uint64_t epoch_ = 0;
};

// Union of tables keyed by job id. On conflict the entry with the latest
// heartbeat wins, except that a job active in any input stays active.
// Result epoch = max input epoch + 1. Commutative, associative, and
// idempotent over the same inputs. Throws IntegrityError on immutable
// attribute conflicts.
JobStatusTable merge_tables(const std::vector<JobStatusTable>& tables);

} // namespace themis
