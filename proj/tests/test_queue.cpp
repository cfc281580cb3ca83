#include <doctest.h>

#include <cmath>
#include <random>

#include "themis/error.hpp"
#include "themis/queue.hpp"

using namespace themis;

namespace {

IORequest req(std::uint64_t id, const std::string& job, SimTime arrival,
              std::uint64_t bytes = 1 << 20) {
    IORequest r;
    r.request_id = id;
    r.job_id = job;
    r.kind = bytes == 0 ? RequestKind::stat : RequestKind::write;
    r.length = bytes;
    r.arrival_time = arrival;
    return r;
}

TokenAssignment assign(std::map<std::string, double> probs) {
    TokenAssignment a;
    a.probabilities = std::move(probs);
    return a;
}

} // namespace

TEST_CASE("enqueue builds per-job FIFO queues") {
    QueueSet qs;
    CHECK(qs.empty());
    qs.enqueue(req(1, "J1", 0));
    CHECK(qs.pending("J1") == 1);
    qs.enqueue(req(2, "J1", 1));
    qs.enqueue(req(3, "J2", 2));
    qs.enqueue(req(4, "J3", 3));
    CHECK(qs.queues().size() == 3);
    CHECK(qs.total_pending() == 4);
    CHECK(qs.pop_job("J1").request_id == 1);
    CHECK(qs.pop_job("J1").request_id == 2);
}

TEST_CASE("draw_queue maps segments deterministically") {
    QueueSet qs;
    qs.enqueue(req(1, "J1", 0));
    qs.enqueue(req(2, "J2", 0));
    TokenAssignment a = assign({{"J1", 0.8}, {"J2", 0.2}});
    CHECK(qs.draw_queue(a, 0.5) == "J1");
    CHECK(qs.draw_queue(a, 0.79) == "J1");
    CHECK(qs.draw_queue(a, 0.81) == "J2");
}

TEST_CASE("draw_queue renormalizes away empty queues") {
    QueueSet qs;
    qs.enqueue(req(1, "J2", 0)); // J1 idle
    TokenAssignment a = assign({{"J1", 0.8}, {"J2", 0.2}});
    for (double u : {0.0, 0.3, 0.99}) CHECK(qs.draw_queue(a, u) == "J2");

    // three-way with one idle: J1 0.5, J2 0.25 -> segments 2/3, 1/3
    QueueSet qs3;
    qs3.enqueue(req(1, "J1", 0));
    qs3.enqueue(req(2, "J2", 0));
    TokenAssignment a3 = assign({{"J1", 0.5}, {"J2", 0.25}, {"J3", 0.25}});
    CHECK(qs3.draw_queue(a3, 0.7) == "J2");
    CHECK(qs3.draw_queue(a3, 0.6) == "J1");
}

TEST_CASE("draw_queue with nothing pending") {
    QueueSet qs;
    CHECK_THROWS_AS(qs.draw_queue(assign({{"J1", 1.0}}), 0.5), EmptyError);
    Rng rng(1);
    TokenAssignment a = assign({{"J1", 1.0}});
    CHECK_THROWS_AS(qs.next_request(a, rng), EmptyError);
    CHECK_THROWS_AS(qs.fifo_next(), EmptyError);
}

TEST_CASE("next_request keeps per-job FIFO order") {
    QueueSet qs;
    for (int i = 0; i < 3; ++i) qs.enqueue(req(i, "J1", i));
    Rng rng(42);
    TokenAssignment a = assign({{"J1", 1.0}});
    for (int i = 0; i < 3; ++i) CHECK(qs.next_request(a, rng).request_id == i);
}

TEST_CASE("dispatch frequencies follow the assignment") {
    // {J1:0.8, J2:0.2}, both queues kept non-empty: 80,000 +- 1,000 of 1e5
    QueueSet qs;
    qs.enqueue(req(0, "J1", 0));
    qs.enqueue(req(1, "J2", 0));
    TokenAssignment a = assign({{"J1", 0.8}, {"J2", 0.2}});
    Rng rng(2024);
    int j1 = 0;
    for (int i = 0; i < 100'000; ++i) {
        IORequest r = qs.next_request(a, rng);
        if (r.job_id == "J1") ++j1;
        qs.enqueue(req(2 + i, r.job_id, i)); // keep non-empty
    }
    CHECK(std::abs(j1 - 80'000) <= 1'000);

    // equal split: 50,000 +- 1,000 each
    TokenAssignment eq = assign({{"J1", 0.5}, {"J2", 0.5}});
    Rng rng2(7);
    j1 = 0;
    for (int i = 0; i < 100'000; ++i) {
        IORequest r = qs.next_request(eq, rng2);
        if (r.job_id == "J1") ++j1;
        qs.enqueue(req(200'000 + i, r.job_id, i));
    }
    CHECK(std::abs(j1 - 50'000) <= 1'000);
}

TEST_CASE("opportunity fairness: an idle job's share goes to the others") {
    QueueSet qs;
    qs.enqueue(req(0, "J1", 0));
    qs.enqueue(req(1, "J2", 0));
    // J3 idle; J1:J2 renormalize 0.5/0.3 -> 62.5%/37.5%
    TokenAssignment a = assign({{"J1", 0.5}, {"J2", 0.3}, {"J3", 0.2}});
    Rng rng(5);
    int n = 100'000, j1 = 0;
    for (int i = 0; i < n; ++i) {
        IORequest r = qs.next_request(a, rng);
        if (r.job_id == "J1") ++j1;
        qs.enqueue(req(2 + i, r.job_id, i));
    }
    double share = static_cast<double>(j1) / n;
    CHECK(std::abs(share - 0.625) < 0.02);
}

TEST_CASE("chi-square goodness of fit for random assignments") {
    // critical values at alpha = 0.001 for df = 1..9
    const double crit[] = {10.828, 13.816, 16.266, 18.467, 20.515,
                           22.458, 24.322, 26.124, 27.877};
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 20; ++trial) {
        int k = 2 + static_cast<int>(gen() % 9); // 2..10 jobs
        std::vector<double> probs(k);
        double sum = 0.0;
        for (double& p : probs) {
            p = 0.05 + static_cast<double>(gen() % 1000) / 1000.0;
            sum += p;
        }
        for (double& p : probs) p /= sum;

        QueueSet qs;
        TokenAssignment a;
        for (int j = 0; j < k; ++j) {
            std::string id = "J" + std::to_string(j);
            a.probabilities[id] = probs[j];
            qs.enqueue(req(j, id, 0));
        }
        // sorted job-id order: J0..J9 with k<=10 stays lexicographic
        Rng rng(1000 + trial);
        const int n = 100'000;
        std::map<std::string, int> counts;
        for (int i = 0; i < n; ++i) {
            IORequest r = qs.next_request(a, rng);
            ++counts[r.job_id];
            qs.enqueue(req(k + i, r.job_id, i));
        }
        double chi2 = 0.0;
        for (int j = 0; j < k; ++j) {
            double expect = a.probabilities.at("J" + std::to_string(j)) * n;
            double diff = counts["J" + std::to_string(j)] - expect;
            chi2 += diff * diff / expect;
        }
        CHECK(chi2 < crit[k - 2]);
    }
}

TEST_CASE("fifo_next: global arrival order and the starvation pathology") {
    QueueSet qs;
    // J1 floods 100 requests at t=0, J2 arrives with one at t=1
    for (int i = 0; i < 100; ++i) qs.enqueue(req(i, "J1", 0));
    qs.enqueue(req(100, "J2", 1));
    for (int i = 0; i < 100; ++i) CHECK(qs.fifo_next().job_id == "J1");
    CHECK(qs.fifo_next().job_id == "J2"); // dispatched 101st

    // interleaved arrivals come out in strict arrival order, ties by id
    qs.enqueue(req(201, "J2", 10));
    qs.enqueue(req(200, "J1", 10));
    qs.enqueue(req(202, "J3", 9));
    CHECK(qs.fifo_next().request_id == 202);
    CHECK(qs.fifo_next().request_id == 200);
    CHECK(qs.fifo_next().request_id == 201);
}

TEST_CASE("work conservation") {
    QueueSet qs;
    std::mt19937_64 gen(3);
    TokenAssignment a = assign({{"J0", 0.6}, {"J1", 0.3}, {"J2", 0.1}});
    Rng rng(3);
    for (int i = 0; i < 500; ++i) {
        qs.enqueue(req(i, "J" + std::to_string(gen() % 3), static_cast<SimTime>(i)));
    }
    int drained = 0;
    while (!qs.empty()) {
        CHECK_NOTHROW(qs.next_request(a, rng));
        ++drained;
    }
    CHECK(drained == 500);
}

TEST_CASE("remove_drained drops only empty queues") {
    QueueSet qs;
    qs.enqueue(req(0, "J1", 0));
    qs.pop_job("J1");
    qs.remove_drained("J1");
    CHECK(qs.queues().count("J1") == 0);
    qs.enqueue(req(1, "J2", 0));
    qs.remove_drained("J2");
    CHECK(qs.queues().count("J2") == 1);
}
