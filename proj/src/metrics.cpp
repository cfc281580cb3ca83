#include <cmath>
#include <sstream>

#include "themis/sim.hpp"

namespace themis {

namespace {

std::size_t window_of(SimTime t, SimTime window) {
    return static_cast<std::size_t>(t / window);
}

} // namespace

double Metrics::bytes_in(const std::string& job, double from_s, double to_s) const {
    double total = 0.0;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        double ws = static_cast<double>(w) * 1e-6 * static_cast<double>(window);
        if (ws < from_s || ws + 1e-6 * static_cast<double>(window) > to_s) continue;
        auto it = windows[w].find(job);
        if (it != windows[w].end()) total += it->second.bytes;
    }
    return total;
}

double Metrics::user_bytes_in(const std::string& user, double from_s, double to_s) const {
    double total = 0.0;
    for (const auto& [job, u] : job_user) {
        if (u == user) total += bytes_in(job, from_s, to_s);
    }
    return total;
}

double Metrics::group_bytes_in(const std::string& group, double from_s, double to_s) const {
    double total = 0.0;
    for (const auto& [job, g] : job_group) {
        if (g == group) total += bytes_in(job, from_s, to_s);
    }
    return total;
}

double Metrics::total_bytes_all() const {
    double total = 0.0;
    for (const auto& [job, b] : total_bytes) total += b;
    return total;
}

std::uint64_t Metrics::ops_in(const std::string& job, double from_s, double to_s) const {
    std::uint64_t total = 0;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        double ws = static_cast<double>(w) * 1e-6 * static_cast<double>(window);
        if (ws < from_s || ws + 1e-6 * static_cast<double>(window) > to_s) continue;
        auto it = windows[w].find(job);
        if (it != windows[w].end()) total += it->second.ops;
    }
    return total;
}

double Metrics::share_std(const std::string& job, double from_s, double to_s) const {
    std::vector<double> shares;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        double ws = static_cast<double>(w) * 1e-6 * static_cast<double>(window);
        if (ws < from_s || ws + 1e-6 * static_cast<double>(window) > to_s) continue;
        double total = 0.0;
        for (const auto& [id, jw] : windows[w]) total += jw.bytes;
        if (total <= 0.0) continue;
        auto it = windows[w].find(job);
        shares.push_back(it == windows[w].end() ? 0.0 : it->second.bytes / total);
    }
    if (shares.size() < 2) return 0.0;
    double mean = 0.0;
    for (double s : shares) mean += s;
    mean /= static_cast<double>(shares.size());
    double var = 0.0;
    for (double s : shares) var += (s - mean) * (s - mean);
    var /= static_cast<double>(shares.size() - 1);
    return std::sqrt(var);
}

std::string Metrics::windows_csv() const {
    std::ostringstream out;
    out << "window_start_s,job_id,bytes,ops\n";
    for (std::size_t w = 0; w < windows.size(); ++w) {
        for (const auto& [job, jw] : windows[w]) {
            out << (static_cast<double>(w) * 1e-6 * static_cast<double>(window)) << ',' << job
                << ',' << static_cast<std::uint64_t>(jw.bytes) << ',' << jw.ops << '\n';
        }
    }
    return out.str();
}

std::string Metrics::summary_csv() const {
    std::ostringstream out;
    out << "job_id,user_id,group_id,total_bytes,total_ops,completion_s\n";
    for (const auto& [job, bytes] : total_bytes) {
        auto user = job_user.find(job);
        auto group = job_group.find(job);
        auto ops = total_ops.find(job);
        auto done = job_completion.find(job);
        out << job << ',' << (user == job_user.end() ? "" : user->second) << ','
            << (group == job_group.end() ? "" : group->second) << ','
            << static_cast<std::uint64_t>(bytes) << ','
            << (ops == total_ops.end() ? 0 : ops->second) << ',';
        if (done != job_completion.end()) {
            out << (static_cast<double>(done->second) * 1e-6);
        }
        out << '\n';
    }
    return out.str();
}

std::string Metrics::trace_csv() const {
    std::ostringstream out;
    out << "request_id,job_id,kind,bytes,arrival_time,dispatch_time,completion_time\n";
    for (const CompletionRecord& r : trace) {
        out << r.request_id << ',' << r.job_id << ',' << r.kind << ',' << r.bytes << ','
            << r.arrival_time << ',' << r.dispatch_time << ',' << r.completion_time << '\n';
    }
    return out.str();
}

Metrics collect_metrics(const std::vector<CompletionRecord>& trace, SimTime end_time) {
    Metrics m;
    m.end_time = end_time;
    for (const CompletionRecord& r : trace) {
        std::size_t w = window_of(r.completion_time, m.window);
        if (w >= m.windows.size()) m.windows.resize(w + 1);
        JobWindow& jw = m.windows[w][r.job_id];
        jw.bytes += static_cast<double>(r.bytes);
        jw.ops += 1;
        m.total_bytes[r.job_id] += static_cast<double>(r.bytes);
        m.total_ops[r.job_id] += 1;
    }
    return m;
}

} // namespace themis
