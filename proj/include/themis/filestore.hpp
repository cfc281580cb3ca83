#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace themis {

// Consistent-hash ring over server ids with virtual nodes. Placement is a
// pure function of (path, ring shape); golden vectors in the tests pin the
// hash choice.
class HashRing {
public:
    explicit HashRing(int n_servers, int vnodes_per_server = 64);

    // Server ids for each stripe of a file: the first is the ring successor
    // of the path's hash, later stripes continue around the ring to the
    // next distinct servers. Throws Error if stripe_count > n_servers.
    std::vector<int> place(const std::string& path, int stripe_count) const;

    int owner(const std::string& path) const { return place(path, 1)[0]; }
    int n_servers() const { return n_servers_; }

private:
    int n_servers_;
    std::map<std::uint64_t, int> ring_;
};

struct FileMeta {
    std::string path;
    std::uint64_t size = 0;
    int stripe_count = 1;
    std::uint64_t stripe_size = 0;
    std::vector<int> server_ids;
    std::string parent;
    bool is_dir = false;
};

struct Extent {
    std::uint64_t length = 0;
    std::vector<unsigned char> data; // empty in accounting-only mode
};

// One server's slice of the store: striped byte extents plus the directory
// entries and file metadata it owns.
struct StoreNode {
    int server_id = 0;
    // (path, stripe_index) -> non-overlapping extents keyed by offset
    std::map<std::pair<std::string, int>, std::map<std::uint64_t, Extent>> objects;
    std::map<std::string, std::set<std::string>> directories;
    std::map<std::string, FileMeta> meta;

    // Serializes metadata mutations for this node. Read paths never touch
    // it; the counter lets tests verify that.
    std::mutex meta_lock;
    std::uint64_t meta_lock_acquisitions = 0;
};

// In-memory byte-addressable store: consistent-hash placement, optional
// striping, range reads/writes with zero-filled holes, directory entries.
// With store_payload=false only extent accounting is kept (used by the
// simulator, where moved bytes matter but contents do not).
class FileStore {
public:
    static constexpr std::uint64_t kDefaultStripeSize = 1 << 20; // 1 MB

    FileStore(int n_servers, bool store_payload = true,
              std::string root = "/fs");

    void create_dir(const std::string& path);
    void create_file(const std::string& path, int stripe_count = 1,
                     std::uint64_t stripe_size = kDefaultStripeSize);

    // Write `length` bytes at `offset`; data may be null in accounting mode.
    // File size grows to max(old, offset + length). Throws Error if the
    // path is absent or a directory.
    void write_range(const std::string& path, std::uint64_t offset,
                     const unsigned char* data, std::uint64_t length);

    // Read up to `length` bytes; holes read as zeros, reads past EOF are
    // truncated. Never acquires the metadata lock.
    std::vector<unsigned char> read_range(const std::string& path, std::uint64_t offset,
                                          std::uint64_t length) const;

    struct StatResult {
        std::uint64_t size = 0;
        bool is_dir = false;
    };
    StatResult stat(const std::string& path) const;
    std::vector<std::string> readdir(const std::string& path) const;
    bool exists(const std::string& path) const;

    const HashRing& ring() const { return ring_; }
    const StoreNode& node(int server_id) const { return *nodes_[server_id]; }
    std::uint64_t total_meta_lock_acquisitions() const;

    // Files owned per server, for ring-balance checks.
    std::vector<std::size_t> files_per_server() const;

    const std::string& root() const { return root_; }

private:
    const FileMeta& require_file(const std::string& path) const;
    StoreNode& owner_node(const std::string& path);
    const StoreNode& owner_node(const std::string& path) const;
    static std::string parent_of(const std::string& path);
    void check_path(const std::string& path) const;

    HashRing ring_;
    bool store_payload_;
    std::string root_;
    std::vector<std::unique_ptr<StoreNode>> nodes_;
};

} // namespace themis
