#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>
#include <vector>

#include "themis/error.hpp"
#include "themis/filestore.hpp"

using namespace themis;

namespace {

std::vector<unsigned char> pattern_bytes(std::uint64_t seed, std::size_t n) {
    std::vector<unsigned char> out(n);
    std::mt19937_64 gen(seed);
    for (auto& b : out) b = static_cast<unsigned char>(gen());
    return out;
}

} // namespace

TEST_CASE("ring placement is deterministic and stable across instances") {
    HashRing a(8), b(8);
    for (const char* p : {"/fs/a.dat", "/fs/b.dat", "/fs/deep/dir/file"}) {
        CHECK(a.place(p, 4) == b.place(p, 4));
        CHECK(a.owner(p) == b.owner(p));
    }
}

TEST_CASE("ring placement golden vector") {
    // Frozen output of the FNV-1a/64-vnode ring; guards the hash and walk
    // order against accidental change.
    HashRing ring(8);
    CHECK(ring.place("/fs/a.dat", 4) == std::vector<int>{7, 2, 4, 5});
    CHECK(ring.owner("/fs/a.dat") == 7);
}

TEST_CASE("stripes land on distinct servers") {
    HashRing ring(8);
    for (int i = 0; i < 100; ++i) {
        auto servers = ring.place("/fs/f" + std::to_string(i), 4);
        std::vector<int> sorted = servers;
        std::sort(sorted.begin(), sorted.end());
        CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
    CHECK_THROWS_AS(ring.place("/fs/x", 9), Error);
    CHECK_THROWS_AS(ring.place("/fs/x", 0), Error);
}

TEST_CASE("ring load is balanced within 20% of ideal") {
    HashRing ring(8);
    std::vector<int> counts(8, 0);
    for (int i = 0; i < 10'000; ++i) {
        ++counts[ring.owner("/fs/file-" + std::to_string(i) + ".dat")];
    }
    for (int c : counts) {
        CHECK(c > 1250 * 0.8);
        CHECK(c < 1250 * 1.2);
    }
}

TEST_CASE("write/read round trip, unstriped") {
    FileStore fs(4);
    fs.create_file("/fs/a.dat");
    auto data = pattern_bytes(1, 4096);
    fs.write_range("/fs/a.dat", 0, data.data(), data.size());
    CHECK(fs.read_range("/fs/a.dat", 0, 4096) == data);
    CHECK(fs.stat("/fs/a.dat").size == 4096);

    // partial read
    std::vector<unsigned char> mid(data.begin() + 100, data.begin() + 300);
    CHECK(fs.read_range("/fs/a.dat", 100, 200) == mid);
}

TEST_CASE("disjoint writes both persist") {
    FileStore fs(4);
    fs.create_file("/fs/a.dat");
    auto d1 = pattern_bytes(1, 100);
    auto d2 = pattern_bytes(2, 100);
    fs.write_range("/fs/a.dat", 0, d1.data(), 100);
    fs.write_range("/fs/a.dat", 500, d2.data(), 100);
    CHECK(fs.read_range("/fs/a.dat", 0, 100) == d1);
    CHECK(fs.read_range("/fs/a.dat", 500, 100) == d2);
    CHECK(fs.stat("/fs/a.dat").size == 600);
}

TEST_CASE("overlapping writes: last write wins") {
    FileStore fs(2);
    fs.create_file("/fs/a.dat");
    std::vector<unsigned char> ones(300, 1), twos(100, 2);
    fs.write_range("/fs/a.dat", 0, ones.data(), 300);
    fs.write_range("/fs/a.dat", 100, twos.data(), 100);
    auto got = fs.read_range("/fs/a.dat", 0, 300);
    REQUIRE(got.size() == 300);
    for (int i = 0; i < 100; ++i) CHECK(got[i] == 1);
    for (int i = 100; i < 200; ++i) CHECK(got[i] == 2);
    for (int i = 200; i < 300; ++i) CHECK(got[i] == 1);
}

TEST_CASE("holes read as zeros, reads truncate at EOF") {
    FileStore fs(2);
    fs.create_file("/fs/a.dat");
    std::vector<unsigned char> d(10, 7);
    fs.write_range("/fs/a.dat", 1000, d.data(), 10);
    auto hole = fs.read_range("/fs/a.dat", 0, 1000);
    REQUIRE(hole.size() == 1000);
    CHECK(std::count(hole.begin(), hole.end(), 0) == 1000);

    auto tail = fs.read_range("/fs/a.dat", 1005, 100);
    REQUIRE(tail.size() == 5); // EOF at 1010
    CHECK(std::count(tail.begin(), tail.end(), 7) == 5);
    CHECK(fs.read_range("/fs/a.dat", 2000, 10).empty());
}

TEST_CASE("striped reads agree with an unstriped oracle") {
    // Same random write sequence against a 4-way striped file and an
    // unstriped one; every read must agree byte for byte.
    FileStore striped(8);
    FileStore flat(1);
    striped.create_file("/fs/a.dat", 4, 256); // small stripes to force splits
    flat.create_file("/fs/a.dat");
    std::mt19937_64 gen(77);
    const std::uint64_t span = 16'384;
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t off = gen() % span;
        std::uint64_t len = 1 + gen() % 1024;
        auto data = pattern_bytes(gen(), len);
        striped.write_range("/fs/a.dat", off, data.data(), len);
        flat.write_range("/fs/a.dat", off, data.data(), len);

        std::uint64_t roff = gen() % span;
        std::uint64_t rlen = 1 + gen() % 2048;
        CHECK(striped.read_range("/fs/a.dat", roff, rlen) ==
              flat.read_range("/fs/a.dat", roff, rlen));
    }
    CHECK(striped.stat("/fs/a.dat").size == flat.stat("/fs/a.dat").size);
}

TEST_CASE("striped writes spread bytes over the placement servers") {
    FileStore fs(8);
    fs.create_file("/fs/a.dat", 4, 1024);
    std::vector<unsigned char> d(8 * 1024, 5);
    fs.write_range("/fs/a.dat", 0, d.data(), d.size());
    int with_data = 0;
    for (int s = 0; s < 8; ++s) {
        for (const auto& [key, extents] : fs.node(s).objects) {
            if (key.first == "/fs/a.dat" && !extents.empty()) ++with_data;
        }
    }
    CHECK(with_data == 4);
}

TEST_CASE("reads never take the metadata lock") {
    FileStore fs(4);
    fs.create_file("/fs/a.dat");
    auto d = pattern_bytes(3, 2048);
    fs.write_range("/fs/a.dat", 0, d.data(), d.size());
    std::uint64_t before = fs.total_meta_lock_acquisitions();
    for (int i = 0; i < 100; ++i) {
        fs.read_range("/fs/a.dat", (i * 13) % 2000, 64);
        fs.stat("/fs/a.dat");
        fs.readdir("/fs");
    }
    CHECK(fs.total_meta_lock_acquisitions() == before);
}

TEST_CASE("writes take the owner's metadata lock") {
    FileStore fs(4);
    fs.create_file("/fs/a.dat");
    std::uint64_t before = fs.total_meta_lock_acquisitions();
    unsigned char b = 0;
    fs.write_range("/fs/a.dat", 0, &b, 1);
    CHECK(fs.total_meta_lock_acquisitions() == before + 1);
}

TEST_CASE("directory semantics") {
    FileStore fs(4);
    fs.create_dir("/fs/exp");
    fs.create_file("/fs/exp/a.dat");
    fs.create_file("/fs/exp/b.dat");
    fs.create_dir("/fs/exp/sub");
    CHECK(fs.readdir("/fs/exp") == std::vector<std::string>{"a.dat", "b.dat", "sub"});
    CHECK(fs.readdir("/fs") == std::vector<std::string>{"exp"});
    CHECK(fs.stat("/fs/exp").is_dir);
    CHECK(!fs.stat("/fs/exp/a.dat").is_dir);
    CHECK(fs.exists("/fs/exp/sub"));
    CHECK(!fs.exists("/fs/exp/c.dat"));
}

TEST_CASE("namespace errors") {
    FileStore fs(4);
    CHECK_THROWS_AS(fs.create_file("/fs/missing/a.dat"), Error);
    CHECK_THROWS_AS(fs.create_file("/elsewhere/a.dat"), Error);
    fs.create_file("/fs/a.dat");
    CHECK_THROWS_AS(fs.create_file("/fs/a.dat"), Error);
    CHECK_THROWS_AS(fs.create_dir("/fs/a.dat"), Error);
    CHECK_THROWS_AS(fs.read_range("/fs/nope", 0, 1), Error);
    CHECK_THROWS_AS(fs.write_range("/fs/nope", 0, nullptr, 1), Error);
    CHECK_THROWS_AS(fs.write_range("/fs", 0, nullptr, 1), Error);
    CHECK_THROWS_AS(fs.stat("/fs/nope"), Error);
    CHECK_THROWS_AS(fs.readdir("/fs/a.dat"), Error);
    CHECK_THROWS_AS(fs.create_file("/fs/b.dat", 5), Error); // 5 stripes, 4 servers
}

TEST_CASE("accounting-only mode tracks sizes without payload") {
    FileStore fs(4, false);
    fs.create_file("/fs/a.dat");
    fs.write_range("/fs/a.dat", 0, nullptr, 1 << 20);
    CHECK(fs.stat("/fs/a.dat").size == 1 << 20);
    auto r = fs.read_range("/fs/a.dat", 0, 4096);
    CHECK(r.size() == 4096);
    CHECK(std::count(r.begin(), r.end(), 0) == 4096);
}

TEST_CASE("metadata spread over servers stays balanced") {
    FileStore fs(8);
    for (int i = 0; i < 10'000; ++i) {
        fs.create_file("/fs/file-" + std::to_string(i) + ".dat");
    }
    auto counts = fs.files_per_server();
    std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    CHECK(total >= 10'000);
    for (std::size_t c : counts) {
        CHECK(static_cast<double>(c) > 1250 * 0.8);
        CHECK(static_cast<double>(c) < 1250 * 1.2 + 1);
    }
}
