#include "themis/baselines.hpp"

#include <algorithm>

#include "themis/error.hpp"

namespace themis {

void GiftScheduler::recompute(const QueueSet& qs, SimTime now) {
    if (last_recompute_ >= 0 && now - last_recompute_ < mu_) return;
    shares_.clear();
    served_.clear();
    total_served_ = 0.0;
    std::vector<std::string> busy = qs.busy_jobs();
    if (!busy.empty()) {
        double share = 1.0 / static_cast<double>(busy.size());
        for (const std::string& id : busy) shares_[id] = share;
    }
    last_recompute_ = now;
}

IORequest GiftScheduler::next(QueueSet& qs) {
    if (qs.empty()) throw EmptyError("nothing to dispatch");
    const std::string* best = nullptr;
    double best_deficit = 0.0;
    for (const std::string& id : qs.busy_jobs()) {
        auto sh = shares_.find(id);
        // Jobs that appeared after the last recompute get no share until
        // the next interval; still dispatch them if nothing else is entitled.
        double share = sh == shares_.end() ? 0.0 : sh->second;
        auto sv = served_.find(id);
        double served = sv == served_.end() ? 0.0 : sv->second;
        double deficit = share * total_served_ - served;
        if (!best || deficit > best_deficit) {
            best = &qs.queues().find(id)->first;
            best_deficit = deficit;
        }
    }
    IORequest req = qs.pop_job(*best);
    double cost = static_cast<double>(std::max<std::uint64_t>(req.length, 1));
    served_[req.job_id] += cost;
    total_served_ += cost;
    return req;
}

void TbfScheduler::register_job(const std::string& job_id, double rate) {
    rates_.emplace(job_id, rate > 0.0 ? rate : default_rate_);
    buckets_.emplace(job_id, 0.0);
    compensation_.emplace(job_id, 0.0);
}

void TbfScheduler::refill(SimTime dt, const QueueSet& qs) {
    double seconds = static_cast<double>(dt) * 1e-6;
    double pool = 0.0;
    std::vector<std::string> busy;
    double busy_rate_sum = 0.0;
    for (auto& [id, bucket] : buckets_) {
        double grant = rates_.at(id) * seconds;
        granted_ += grant;
        bool pending = qs.pending(id) > 0;
        if (pending) {
            busy.push_back(id);
            busy_rate_sum += rates_.at(id);
        }
        double& comp = compensation_[id];
        if (pending) {
            if (bucket <= 1e-9) {
                // Throttled while holding work: record the debt.
                comp += grant;
                bucket += grant;
            } else {
                double repay = std::min(comp, grant);
                comp -= repay;
                repaid_ += repay;
                bucket += grant + repay;
            }
            double allowed = cap_ + comp;
            if (bucket > allowed) {
                pool += bucket - allowed;
                bucket = allowed;
            }
        } else {
            bucket += grant;
            if (bucket > cap_) {
                pool += bucket - cap_;
                bucket = cap_;
            }
        }
    }
    if (pool > 0.0) {
        if (busy.empty()) {
            dropped_ += pool;
        } else {
            // PSSB: spare tokens go to jobs with pending work, proportionally
            // to their rates.
            for (const std::string& id : busy) {
                buckets_[id] += pool * rates_.at(id) / busy_rate_sum;
            }
            redistributed_ += pool;
        }
    }
}

void GiftScheduler::set_shares(std::map<std::string, double> shares) {
    shares_ = std::move(shares);
    served_.clear();
    total_served_ = 0.0;
}

std::optional<IORequest> TbfScheduler::next(QueueSet& qs) {
    if (qs.empty()) throw EmptyError("nothing to dispatch");
    const std::string* best = nullptr;
    for (const std::string& id : qs.busy_jobs()) {
        auto it = buckets_.find(id);
        // Tolerance matters: rate * dt in floating point can land a hair
        // under a whole token.
        if (it == buckets_.end() || it->second < 1.0 - 1e-9) continue;
        if (!best || it->second > buckets_.at(*best)) best = &it->first;
    }
    if (!best) return std::nullopt; // throttled
    buckets_[*best] -= 1.0;
    consumed_ += 1.0;
    return qs.pop_job(*best);
}

double TbfScheduler::bucket(const std::string& job_id) const {
    auto it = buckets_.find(job_id);
    return it == buckets_.end() ? 0.0 : it->second;
}

double TbfScheduler::compensation(const std::string& job_id) const {
    auto it = compensation_.find(job_id);
    return it == compensation_.end() ? 0.0 : it->second;
}

double TbfScheduler::bucket_sum() const {
    double s = 0.0;
    for (const auto& [id, b] : buckets_) s += b;
    return s;
}

} // namespace themis
