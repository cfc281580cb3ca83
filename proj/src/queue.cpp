#include "themis/queue.hpp"

#include <algorithm>

#include "themis/error.hpp"

namespace themis {

bool is_metadata_op(RequestKind k) {
    switch (k) {
        case RequestKind::read:
        case RequestKind::write: return false;
        default: return true;
    }
}

const char* request_kind_name(RequestKind k) {
    switch (k) {
        case RequestKind::open: return "open";
        case RequestKind::close: return "close";
        case RequestKind::read: return "read";
        case RequestKind::write: return "write";
        case RequestKind::stat: return "stat";
        case RequestKind::readdir: return "readdir";
        case RequestKind::seek: return "seek";
    }
    return "?";
}

void QueueSet::enqueue(IORequest req) {
    queues_[req.job_id].push_back(std::move(req));
    ++total_;
}

const std::string& QueueSet::draw_queue(const TokenAssignment& assignment, double u) const {
    if (total_ == 0) throw EmptyError("nothing to dispatch");

    // Restrict to non-empty queues and renormalize: idle jobs cede their
    // share. queues_ is an ordered map, so segment order is sorted job-id
    // order and a fixed seed replays the same trace.
    double mass = 0.0;
    std::size_t busy = 0;
    for (const auto& [id, q] : queues_) {
        if (q.empty()) continue;
        ++busy;
        auto it = assignment.probabilities.find(id);
        if (it != assignment.probabilities.end()) mass += it->second;
    }

    // If no busy job carries probability (e.g. all were expired from the
    // table between recomputes), split equally so work conservation holds.
    const std::string* last = nullptr;
    double cum = 0.0;
    for (const auto& [id, q] : queues_) {
        if (q.empty()) continue;
        double p;
        if (mass > 0.0) {
            auto it = assignment.probabilities.find(id);
            p = (it != assignment.probabilities.end() ? it->second : 0.0) / mass;
        } else {
            p = 1.0 / static_cast<double>(busy);
        }
        cum += p;
        last = &id;
        if (u < cum) return id;
    }
    return *last; // u landed in the final segment's rounding slack
}

IORequest QueueSet::next_request(const TokenAssignment& assignment, Rng& rng) {
    const std::string& job = draw_queue(assignment, rng.uniform());
    return pop_job(job);
}

IORequest QueueSet::fifo_next() {
    if (total_ == 0) throw EmptyError("nothing to dispatch");
    const std::string* best = nullptr;
    for (const auto& [id, q] : queues_) {
        if (q.empty()) continue;
        if (!best) {
            best = &id;
            continue;
        }
        const IORequest& cand = q.front();
        const IORequest& cur = queues_.at(*best).front();
        if (cand.arrival_time < cur.arrival_time ||
            (cand.arrival_time == cur.arrival_time && cand.request_id < cur.request_id)) {
            best = &id;
        }
    }
    return pop_job(*best);
}

IORequest QueueSet::pop_job(const std::string& job_id) {
    auto it = queues_.find(job_id);
    if (it == queues_.end() || it->second.empty()) {
        throw EmptyError("queue for job '" + job_id + "' is empty");
    }
    IORequest req = std::move(it->second.front());
    it->second.pop_front();
    --total_;
    return req;
}

const IORequest* QueueSet::peek_job(const std::string& job_id) const {
    auto it = queues_.find(job_id);
    if (it == queues_.end() || it->second.empty()) return nullptr;
    return &it->second.front();
}

std::size_t QueueSet::pending(const std::string& job_id) const {
    auto it = queues_.find(job_id);
    return it == queues_.end() ? 0 : it->second.size();
}

std::vector<std::string> QueueSet::busy_jobs() const {
    std::vector<std::string> out;
    for (const auto& [id, q] : queues_) {
        if (!q.empty()) out.push_back(id);
    }
    return out;
}

void QueueSet::remove_drained(const std::string& job_id) {
    auto it = queues_.find(job_id);
    if (it != queues_.end() && it->second.empty()) queues_.erase(it);
}

} // namespace themis
