#include "themis/filestore.hpp"

#include <algorithm>
#include <cassert>

#include "themis/error.hpp"
#include "themis/rng.hpp"

namespace themis {

HashRing::HashRing(int n_servers, int vnodes_per_server) : n_servers_(n_servers) {
    for (int s = 0; s < n_servers; ++s) {
        for (int v = 0; v < vnodes_per_server; ++v) {
            ring_.emplace(mix64(fnv1a64("server:" + std::to_string(s) + "#" + std::to_string(v))),
                          s);
        }
    }
}

std::vector<int> HashRing::place(const std::string& path, int stripe_count) const {
    if (stripe_count < 1 || stripe_count > n_servers_) {
        throw Error("stripe_count " + std::to_string(stripe_count) + " out of range for " +
                    std::to_string(n_servers_) + " servers");
    }
    std::uint64_t h = mix64(fnv1a64("path:" + path));
    std::vector<int> out;
    auto it = ring_.lower_bound(h);
    while (static_cast<int>(out.size()) < stripe_count) {
        if (it == ring_.end()) it = ring_.begin();
        if (std::find(out.begin(), out.end(), it->second) == out.end()) {
            out.push_back(it->second);
        }
        ++it;
    }
    return out;
}

FileStore::FileStore(int n_servers, bool store_payload, std::string root)
    : ring_(n_servers), store_payload_(store_payload), root_(std::move(root)) {
    for (int s = 0; s < n_servers; ++s) {
        nodes_.push_back(std::make_unique<StoreNode>());
        nodes_.back()->server_id = s;
    }
    // The namespace root always exists.
    FileMeta m;
    m.path = root_;
    m.is_dir = true;
    StoreNode& n = owner_node(root_);
    n.meta.emplace(root_, std::move(m));
    n.directories.emplace(root_, std::set<std::string>{});
}

void FileStore::check_path(const std::string& path) const {
    if (path.size() <= root_.size() || path.compare(0, root_.size(), root_) != 0 ||
        path[root_.size()] != '/' || path.back() == '/') {
        if (path != root_) {
            throw Error("path '" + path + "' is not under namespace root '" + root_ + "'");
        }
    }
}

std::string FileStore::parent_of(const std::string& path) {
    auto slash = path.rfind('/');
    return slash == 0 ? "/" : path.substr(0, slash);
}

StoreNode& FileStore::owner_node(const std::string& path) {
    return *nodes_[ring_.owner(path)];
}

const StoreNode& FileStore::owner_node(const std::string& path) const {
    return *nodes_[ring_.owner(path)];
}

bool FileStore::exists(const std::string& path) const {
    const StoreNode& n = owner_node(path);
    return n.meta.count(path) > 0;
}

void FileStore::create_dir(const std::string& path) {
    check_path(path);
    if (exists(path)) throw Error("path '" + path + "' already exists");
    std::string parent = parent_of(path);
    StoreNode& pn = owner_node(parent);
    {
        std::lock_guard<std::mutex> g(pn.meta_lock);
        ++pn.meta_lock_acquisitions;
        auto pd = pn.directories.find(parent);
        if (pd == pn.directories.end()) throw Error("parent directory '" + parent + "' missing");
        pd->second.insert(path.substr(parent.size() + 1));
    }
    StoreNode& n = owner_node(path);
    std::lock_guard<std::mutex> g(n.meta_lock);
    ++n.meta_lock_acquisitions;
    FileMeta m;
    m.path = path;
    m.parent = parent;
    m.is_dir = true;
    n.meta.emplace(path, std::move(m));
    n.directories.emplace(path, std::set<std::string>{});
}

void FileStore::create_file(const std::string& path, int stripe_count,
                            std::uint64_t stripe_size) {
    check_path(path);
    if (exists(path)) throw Error("path '" + path + "' already exists");
    if (stripe_size == 0) throw Error("stripe_size must be positive");
    std::string parent = parent_of(path);
    StoreNode& pn = owner_node(parent);
    {
        std::lock_guard<std::mutex> g(pn.meta_lock);
        ++pn.meta_lock_acquisitions;
        auto pd = pn.directories.find(parent);
        if (pd == pn.directories.end()) throw Error("parent directory '" + parent + "' missing");
        pd->second.insert(path.substr(parent.size() + 1));
    }
    FileMeta m;
    m.path = path;
    m.parent = parent;
    m.stripe_count = stripe_count;
    m.stripe_size = stripe_size;
    m.server_ids = ring_.place(path, stripe_count);
    StoreNode& n = owner_node(path);
    std::lock_guard<std::mutex> g(n.meta_lock);
    ++n.meta_lock_acquisitions;
    n.meta.emplace(path, std::move(m));
}

const FileMeta& FileStore::require_file(const std::string& path) const {
    const StoreNode& n = owner_node(path);
    auto it = n.meta.find(path);
    if (it == n.meta.end()) throw Error("file '" + path + "' not found");
    if (it->second.is_dir) throw Error("path '" + path + "' is a directory");
    return it->second;
}

namespace {

// Insert [offset, offset+length) into an extent map, trimming or splitting
// whatever it overlaps. Last write wins.
void write_extent(std::map<std::uint64_t, Extent>& m, std::uint64_t offset,
                  std::uint64_t length, const unsigned char* data, bool store_payload) {
    std::uint64_t end = offset + length;

    // Left neighbor overlapping into the range.
    auto it = m.lower_bound(offset);
    if (it != m.begin()) {
        auto prev = std::prev(it);
        std::uint64_t pend = prev->first + prev->second.length;
        if (pend > offset) {
            if (pend > end) {
                // Split: keep a right remainder.
                Extent right;
                right.length = pend - end;
                if (store_payload) {
                    right.data.assign(prev->second.data.begin() + (end - prev->first),
                                      prev->second.data.end());
                }
                m.emplace(end, std::move(right));
            }
            prev->second.length = offset - prev->first;
            if (store_payload) prev->second.data.resize(prev->second.length);
            if (prev->second.length == 0) m.erase(prev);
        }
    }
    // Extents starting inside the range.
    it = m.lower_bound(offset);
    while (it != m.end() && it->first < end) {
        std::uint64_t eend = it->first + it->second.length;
        if (eend <= end) {
            it = m.erase(it);
        } else {
            Extent right;
            right.length = eend - end;
            if (store_payload) {
                right.data.assign(it->second.data.begin() + (end - it->first),
                                  it->second.data.end());
            }
            m.erase(it);
            m.emplace(end, std::move(right));
            break;
        }
    }
    Extent e;
    e.length = length;
    if (store_payload && data) e.data.assign(data, data + length);
    m[offset] = std::move(e);
}

} // namespace

void FileStore::write_range(const std::string& path, std::uint64_t offset,
                            const unsigned char* data, std::uint64_t length) {
    const FileMeta& meta = require_file(path);
    // Split the logical range into stripe-local chunks.
    std::uint64_t pos = offset;
    std::uint64_t remaining = length;
    while (remaining > 0) {
        std::uint64_t chunk = pos / meta.stripe_size;
        int stripe_idx = static_cast<int>(chunk % meta.stripe_count);
        std::uint64_t within = pos % meta.stripe_size;
        std::uint64_t local = (chunk / meta.stripe_count) * meta.stripe_size + within;
        std::uint64_t n = std::min(remaining, meta.stripe_size - within);
        StoreNode& sn = *nodes_[meta.server_ids[stripe_idx]];
        write_extent(sn.objects[{path, stripe_idx}], local, n,
                     data ? data + (pos - offset) : nullptr, store_payload_);
        pos += n;
        remaining -= n;
    }
    // Size update on the owning server, under its metadata lock.
    StoreNode& n = owner_node(path);
    std::lock_guard<std::mutex> g(n.meta_lock);
    ++n.meta_lock_acquisitions;
    FileMeta& m = n.meta.at(path);
    m.size = std::max(m.size, offset + length);
}

std::vector<unsigned char> FileStore::read_range(const std::string& path, std::uint64_t offset,
                                                 std::uint64_t length) const {
    const FileMeta& meta = require_file(path);
    if (offset >= meta.size) return {};
    length = std::min(length, meta.size - offset);
    std::vector<unsigned char> out(length, 0);
    if (!store_payload_) return out;

    std::uint64_t pos = offset;
    std::uint64_t remaining = length;
    while (remaining > 0) {
        std::uint64_t chunk = pos / meta.stripe_size;
        int stripe_idx = static_cast<int>(chunk % meta.stripe_count);
        std::uint64_t within = pos % meta.stripe_size;
        std::uint64_t local = (chunk / meta.stripe_count) * meta.stripe_size + within;
        std::uint64_t n = std::min(remaining, meta.stripe_size - within);
        const StoreNode& sn = *nodes_[meta.server_ids[stripe_idx]];
        auto obj = sn.objects.find({path, stripe_idx});
        if (obj != sn.objects.end()) {
            // Copy every stored extent intersecting [local, local+n).
            auto it = obj->second.lower_bound(local);
            if (it != obj->second.begin()) --it;
            for (; it != obj->second.end() && it->first < local + n; ++it) {
                std::uint64_t estart = it->first;
                std::uint64_t eend = estart + it->second.length;
                std::uint64_t from = std::max(estart, local);
                std::uint64_t to = std::min(eend, local + n);
                if (from >= to) continue;
                std::copy(it->second.data.begin() + (from - estart),
                          it->second.data.begin() + (to - estart),
                          out.begin() + (pos - offset) + (from - local));
            }
        }
        pos += n;
        remaining -= n;
    }
    return out;
}

FileStore::StatResult FileStore::stat(const std::string& path) const {
    const StoreNode& n = owner_node(path);
    auto it = n.meta.find(path);
    if (it == n.meta.end()) throw Error("stat: '" + path + "' not found");
    return {it->second.size, it->second.is_dir};
}

std::vector<std::string> FileStore::readdir(const std::string& path) const {
    const StoreNode& n = owner_node(path);
    auto it = n.directories.find(path);
    if (it == n.directories.end()) throw Error("readdir: '" + path + "' is not a directory");
    return {it->second.begin(), it->second.end()};
}

std::uint64_t FileStore::total_meta_lock_acquisitions() const {
    std::uint64_t total = 0;
    for (const auto& n : nodes_) total += n->meta_lock_acquisitions;
    return total;
}

std::vector<std::size_t> FileStore::files_per_server() const {
    std::vector<std::size_t> out(nodes_.size(), 0);
    for (std::size_t s = 0; s < nodes_.size(); ++s) {
        out[s] = nodes_[s]->meta.size();
    }
    return out;
}

} // namespace themis
