#include <doctest.h>
#include <sstream>
#include "themis/error.hpp"
#include "themis/table.hpp"

using namespace themis;

namespace {
JobInfo job(const std::string& id, const std::string& user, const std::string& group, int nodes) {
    JobInfo j;
    j.job_id = id;
    j.user_id = user;
    j.group_id = group;
    j.node_count = nodes;
    return j;
}
} // namespace

TEST_CASE("heartbeat inserts, refreshes and reactivates") {
    JobStatusTable t;
    t.apply_heartbeat(job("J9", "u1", "g1", 2), 100);
    REQUIRE(t.find("J9") != nullptr);
    CHECK(t.find("J9")->status == JobStatus::active);
    CHECK(t.find("J9")->last_heartbeat == 100);

    t.expire_inactive(20'000'000, 10'000'000);
    CHECK(t.find("J9")->status == JobStatus::inactive);
    t.apply_heartbeat(job("J9", "u1", "g1", 2), 20'000'001);
    CHECK(t.find("J9")->status == JobStatus::active);

    // idempotent upsert: single entry, latest timestamp
    t.apply_heartbeat(job("J9", "u1", "g1", 2), 20'000'002);
    CHECK(t.size() == 1);
    CHECK(t.find("J9")->last_heartbeat == 20'000'002);
}

TEST_CASE("epoch strictly increases across mutations") {
    JobStatusTable t;
    auto e0 = t.epoch();
    t.apply_heartbeat(job("J1", "u1", "g1", 1), 0);
    auto e1 = t.epoch();
    CHECK(e1 > e0);
    t.expire_inactive(1, 10); // no change
    CHECK(t.epoch() == e1);
    t.expire_inactive(100, 10); // J1 expires
    CHECK(t.epoch() > e1);
}

TEST_CASE("expiry threshold") {
    JobStatusTable t;
    t.apply_heartbeat(job("J1", "u1", "g1", 1), 0);
    t.expire_inactive(9'000'000, 10'000'000);
    CHECK(t.find("J1")->status == JobStatus::active);
    t.expire_inactive(11'000'000, 10'000'000);
    CHECK(t.find("J1")->status == JobStatus::inactive);
}

TEST_CASE("heartbeat rejects immutable attribute conflicts") {
    JobStatusTable t;
    t.apply_heartbeat(job("J1", "u1", "g1", 4), 0);
    CHECK_THROWS_AS(t.apply_heartbeat(job("J1", "u2", "g1", 4), 1), IntegrityError);
    CHECK_THROWS_AS(t.apply_heartbeat(job("J1", "u1", "g1", 8), 1), IntegrityError);
}

TEST_CASE("merge unions entries and keeps latest heartbeat") {
    JobStatusTable s1, s2;
    s1.apply_heartbeat(job("J1", "u1", "g1", 16), 5);
    s1.apply_heartbeat(job("J2", "u2", "g1", 8), 5);
    s2.apply_heartbeat(job("J1", "u1", "g1", 16), 9);
    s2.apply_heartbeat(job("J3", "u3", "g1", 8), 9);

    JobStatusTable m = merge_tables({s1, s2});
    CHECK(m.size() == 3);
    CHECK(m.find("J1")->last_heartbeat == 9);
    CHECK(m.epoch() == std::max(s1.epoch(), s2.epoch()) + 1);

    // commutativity, entry-wise
    JobStatusTable m2 = merge_tables({s2, s1});
    for (const auto& [id, e] : m.entries()) {
        const JobInfo* o = m2.find(id);
        REQUIRE(o != nullptr);
        CHECK(o->last_heartbeat == e.last_heartbeat);
        CHECK(o->status == e.status);
    }

    // single-input idempotence (epoch bumped)
    JobStatusTable m3 = merge_tables({s1});
    CHECK(m3.size() == s1.size());
    CHECK(m3.epoch() == s1.epoch() + 1);
}

TEST_CASE("merge keeps a job active if any input says active") {
    JobStatusTable s1, s2;
    s1.apply_heartbeat(job("J1", "u1", "g1", 1), 0);
    s1.expire_inactive(100'000'000, 1);
    s2.apply_heartbeat(job("J1", "u1", "g1", 1), 0);
    JobStatusTable m = merge_tables({s1, s2});
    CHECK(m.find("J1")->status == JobStatus::active);
}

TEST_CASE("merge rejects immutable conflicts") {
    JobStatusTable s1, s2;
    s1.apply_heartbeat(job("J1", "u1", "g1", 16), 0);
    s2.apply_heartbeat(job("J1", "u1", "g1", 8), 0);
    CHECK_THROWS_AS(merge_tables({s1, s2}), IntegrityError);
}

TEST_CASE("text round trip") {
    std::istringstream in(
        "# job table\n"
        "J1 alice g1 16 1 active 100\n"
        "J2 bob g1 8 2.5 inactive 50\n");
    JobStatusTable t = JobStatusTable::from_text(in);
    REQUIRE(t.size() == 2);
    CHECK(t.find("J2")->priority_weight == doctest::Approx(2.5));
    CHECK(t.find("J2")->status == JobStatus::inactive);

    std::ostringstream out;
    t.to_text(out);
    std::istringstream in2(out.str());
    JobStatusTable t2 = JobStatusTable::from_text(in2);
    CHECK(t2.size() == 2);
    CHECK(t2.find("J1")->node_count == 16);
}

TEST_CASE("text parse errors") {
    std::istringstream bad1("J1 alice g1 16 1 bogus 100\n");
    CHECK_THROWS_AS(JobStatusTable::from_text(bad1), ParseError);
    std::istringstream bad2("J1 alice g1\n");
    CHECK_THROWS_AS(JobStatusTable::from_text(bad2), ParseError);
}
