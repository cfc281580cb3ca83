#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "themis/queue.hpp"
#include "themis/table.hpp"

namespace themis {

// Interval-based bandwidth allocator in the style of GIFT's BSIP: every mu
// the shares are recomputed as an equal split over jobs with pending work
// (the LP refinement is not reproduced). Between recomputes dispatch goes
// to the job lagging furthest behind its share.
class GiftScheduler {
public:
    explicit GiftScheduler(SimTime mu = 500'000) : mu_(mu) {}

    // No-op unless a full interval elapsed since the last recompute.
    void recompute(const QueueSet& qs, SimTime now);

    // Pop from the job with the largest deficit (share * total served -
    // own served bytes), FIFO within the job. Throws EmptyError when no
    // work is pending.
    IORequest next(QueueSet& qs);

    const std::map<std::string, double>& shares() const { return shares_; }
    SimTime last_recompute() const { return last_recompute_; }

    // Override the current shares (resets served counters). Exists so the
    // deficit dispatch can be exercised with non-equal splits.
    void set_shares(std::map<std::string, double> shares);

private:
    SimTime mu_;
    SimTime last_recompute_ = -1; // force recompute on first call
    std::map<std::string, double> shares_;
    std::map<std::string, double> served_; // bytes since last recompute
    double total_served_ = 0.0;
};

// Token-bucket scheduler in the style of TBF with HTC and PSSB. One bucket
// per job, one token per dispatched request.
class TbfScheduler {
public:
    TbfScheduler(double rate_tokens_per_s, double cap)
        : default_rate_(rate_tokens_per_s), cap_(cap) {}

    // Create a bucket for a job (starts empty; refills fill it). rate = 0
    // uses the scheduler-wide default.
    void register_job(const std::string& job_id, double rate = 0.0);

    // Grant rate*dt tokens per bucket. PSSB: overflow past an idle job's
    // cap is redistributed proportionally to rates among jobs with pending
    // work (dropped if none). HTC: a job that was throttled with pending
    // work (empty bucket) accrues compensation; it is repaid, ahead of cap
    // enforcement, once the job holds tokens again.
    void refill(SimTime dt, const QueueSet& qs);

    // Dispatch from the eligible job (pending work, >= 1 token) with the
    // largest balance, ties by job id; costs one token. Returns nullopt
    // when all pending jobs are out of tokens (throttled). Throws
    // EmptyError when nothing is pending at all.
    std::optional<IORequest> next(QueueSet& qs);

    double bucket(const std::string& job_id) const;
    double compensation(const std::string& job_id) const;
    double default_rate() const { return default_rate_; }

    // Token ledger, for conservation checks:
    // sum(buckets) == granted + repaid - dropped - consumed.
    double granted_total() const { return granted_; }
    double repaid_total() const { return repaid_; }
    double redistributed_total() const { return redistributed_; }
    double dropped_total() const { return dropped_; }
    double consumed_total() const { return consumed_; }
    double bucket_sum() const;

private:
    double default_rate_;
    double cap_;
    std::map<std::string, double> rates_;
    std::map<std::string, double> buckets_;
    std::map<std::string, double> compensation_;
    double granted_ = 0.0;
    double repaid_ = 0.0;
    double redistributed_ = 0.0;
    double dropped_ = 0.0;
    double consumed_ = 0.0;
};

} // namespace themis
