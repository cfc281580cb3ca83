#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>

#include "themis/policy.hpp"
#include "themis/rng.hpp"
#include "themis/table.hpp"

namespace themis {

enum class RequestKind { open, close, read, write, stat, readdir, seek };

bool is_metadata_op(RequestKind k);
const char* request_kind_name(RequestKind k);

struct IORequest {
    std::uint64_t request_id = 0;
    std::string job_id;
    std::string user_id;
    std::string group_id;
    RequestKind kind = RequestKind::read;
    std::string path;
    std::uint64_t offset = 0;
    std::uint64_t length = 0; // 0 for metadata ops
    SimTime arrival_time = 0;
    std::optional<SimTime> completion_time;
};

// Per-job FIFO request queues plus the weighted-random dispatch state.
// Single-owner: one dispatcher mutates an instance.
class QueueSet {
public:
    // Append a request to its job's queue (auto-created on first use).
    void enqueue(IORequest req);

    // Map a uniform draw u in [0,1) to a job with a non-empty queue.
    // Probability mass of empty queues is renormalized away, so idle jobs
    // cede their share (opportunity fairness). Segments are laid out in
    // sorted job-id order, making traces reproducible for a fixed seed.
    // Throws EmptyError when every queue is empty.
    const std::string& draw_queue(const TokenAssignment& assignment, double u) const;

    // draw_queue, then pop the head of the drawn queue.
    IORequest next_request(const TokenAssignment& assignment, Rng& rng);

    // Globally earliest-arrival pending request, ties broken by request id.
    IORequest fifo_next();

    // Pop the head of a specific job's queue (used by the GIFT/TBF baselines,
    // which pick the job themselves).
    IORequest pop_job(const std::string& job_id);

    const IORequest* peek_job(const std::string& job_id) const;
    std::size_t pending(const std::string& job_id) const;
    std::size_t total_pending() const { return total_; }
    bool empty() const { return total_ == 0; }

    // Jobs with at least one pending request, sorted by id.
    std::vector<std::string> busy_jobs() const;

    // Drop the (empty) queue of an expired job.
    void remove_drained(const std::string& job_id);

    const std::map<std::string, std::deque<IORequest>>& queues() const { return queues_; }

private:
    std::map<std::string, std::deque<IORequest>> queues_;
    std::size_t total_ = 0;
};

} // namespace themis
