#include "themis/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "themis/error.hpp"

namespace themis {

namespace {

using nlohmann::json;

WorkloadPattern pattern_from_string(const std::string& s) {
    if (s == "write_read_cycle") return WorkloadPattern::write_read_cycle;
    if (s == "iops_stat") return WorkloadPattern::iops_stat;
    if (s == "iops_write_read") return WorkloadPattern::iops_write_read;
    throw ParseError("unknown workload pattern '" + s + "'");
}

SimTime seconds_field(const json& j, const char* key, double fallback_s) {
    double s = j.value(key, fallback_s);
    return static_cast<SimTime>(s * 1e6);
}

} // namespace

Scenario load_scenario(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what());
    }
    Scenario sc;
    SimConfig& c = sc.config;
    try {
        c.n_servers = doc.value("n_servers", 1);
        c.workers_per_server = doc.value("workers_per_server", 8);
        c.per_worker_bandwidth = doc.value("per_worker_bandwidth_gbs", 2.5) * 1e9;
        c.per_request_overhead = doc.value("per_request_overhead_us", 10);
        c.scheduler = scheduler_kind_from_string(doc.value("scheduler", std::string("themis")));
        c.policy_text = doc.value("policy", std::string("job-fair"));
        c.lambda = static_cast<SimTime>(doc.value("lambda_ms", 500.0) * 1e3);
        c.heartbeat_interval = seconds_field(doc, "heartbeat_interval_s", 1.0);
        c.heartbeat_timeout = seconds_field(doc, "heartbeat_timeout_s", 10.0);
        c.seed = doc.value("seed", 1ull);
        c.duration_s = doc.value("duration_s", 60.0);
        std::string placement = doc.value("placement", std::string("all-servers"));
        if (placement == "all-servers") {
            c.placement = SimConfig::Placement::all_servers;
        } else if (placement == "hash-disjoint") {
            c.placement = SimConfig::Placement::hash_disjoint;
        } else {
            throw ParseError("unknown placement '" + placement + "'");
        }
        c.request_mb = doc.value("request_mb", 1.0);
        c.gift_mu = seconds_field(doc, "gift_mu_s", 0.5);
        c.tbf_refill_period = seconds_field(doc, "tbf_refill_s", 0.1);
        c.tbf_rate = doc.value("tbf_rate", 0.0);
        c.tbf_cap = doc.value("tbf_cap", 0.0);

        if (!doc.contains("jobs") || !doc["jobs"].is_array()) {
            throw ParseError("scenario: 'jobs' array is required");
        }
        for (const json& jj : doc["jobs"]) {
            WorkloadSpec w;
            w.job_id = jj.at("job_id").get<std::string>();
            w.user_id = jj.value("user_id", w.job_id);
            w.group_id = jj.value("group_id", std::string("g0"));
            w.node_count = jj.value("node_count", 1);
            w.priority_weight = jj.value("priority_weight", 1.0);
            w.procs_per_node = jj.value("procs_per_node", 8);
            w.pattern = pattern_from_string(jj.value("pattern", std::string("write_read_cycle")));
            w.file_mb = jj.value("file_mb", 10.0);
            w.total_mb_per_proc = jj.value("total_mb_per_proc", 0.0);
            w.start_offset_s = jj.value("start_s", 0.0);
            w.run_length_s = jj.value("run_s", 0.0);
            if (jj.contains("servers")) w.servers = jj["servers"].get<std::vector<int>>();
            c.jobs.push_back(std::move(w));
        }

        if (doc.contains("expectations")) {
            for (const json& je : doc["expectations"]) {
                Expectation e;
                e.type = je.at("type").get<std::string>();
                e.name = je.value("name", e.type);
                e.a = je.value("a", std::string());
                e.b = je.value("b", std::string());
                e.job = je.value("job", std::string());
                e.from_s = je.value("from_s", 0.0);
                e.to_s = je.value("to_s", 1e18);
                e.target = je.at("target").get<double>();
                e.tol = je.value("tol", 0.0);
                sc.expectations.push_back(std::move(e));
            }
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario field: ") + e.what());
    }
    c.validate();

    // Expectations may only reference declared jobs / users / groups.
    auto known = [&](const std::string& id, const char* what) {
        if (id.empty()) return;
        for (const WorkloadSpec& w : c.jobs) {
            if (std::string(what) == "job" && w.job_id == id) return;
            if (std::string(what) == "user" && w.user_id == id) return;
            if (std::string(what) == "group" && w.group_id == id) return;
        }
        throw ParseError("expectation references unknown " + std::string(what) + " '" + id + "'");
    };
    for (const Expectation& e : sc.expectations) {
        if (e.type == "ratio" || e.type == "share" || e.type == "completion") {
            known(e.a, "job");
            known(e.b, "job");
            known(e.job, "job");
        } else if (e.type == "user_ratio") {
            known(e.a, "user");
            known(e.b, "user");
        } else if (e.type == "group_ratio") {
            known(e.a, "group");
            known(e.b, "group");
        } else if (e.type != "divergence") {
            throw ParseError("unknown expectation type '" + e.type + "'");
        }
    }
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_scenario(ss.str());
}

std::vector<ExpectationResult> evaluate_expectations(const Scenario& scenario,
                                                     const Metrics& metrics) {
    std::vector<ExpectationResult> out;
    for (const Expectation& e : scenario.expectations) {
        ExpectationResult r;
        r.name = e.name;
        if (e.type == "ratio") {
            double a = metrics.bytes_in(e.a, e.from_s, e.to_s);
            double b = metrics.bytes_in(e.b, e.from_s, e.to_s);
            r.actual = b > 0 ? a / b : std::nan("");
            r.pass = std::isfinite(r.actual) && std::abs(r.actual - e.target) <= e.tol;
        } else if (e.type == "user_ratio") {
            double a = metrics.user_bytes_in(e.a, e.from_s, e.to_s);
            double b = metrics.user_bytes_in(e.b, e.from_s, e.to_s);
            r.actual = b > 0 ? a / b : std::nan("");
            r.pass = std::isfinite(r.actual) && std::abs(r.actual - e.target) <= e.tol;
        } else if (e.type == "group_ratio") {
            double a = metrics.group_bytes_in(e.a, e.from_s, e.to_s);
            double b = metrics.group_bytes_in(e.b, e.from_s, e.to_s);
            r.actual = b > 0 ? a / b : std::nan("");
            r.pass = std::isfinite(r.actual) && std::abs(r.actual - e.target) <= e.tol;
        } else if (e.type == "share") {
            double a = metrics.bytes_in(e.job, e.from_s, e.to_s);
            double total = 0.0;
            for (const auto& [id, b] : metrics.total_bytes) {
                total += metrics.bytes_in(id, e.from_s, e.to_s);
            }
            r.actual = total > 0 ? a / total : std::nan("");
            r.pass = std::isfinite(r.actual) && std::abs(r.actual - e.target) <= e.tol;
        } else if (e.type == "completion") {
            auto it = metrics.job_completion.find(e.job);
            if (it == metrics.job_completion.end()) {
                r.pass = false;
                r.detail = "job did not complete";
            } else {
                r.actual = static_cast<double>(it->second) * 1e-6;
                r.pass = std::abs(r.actual - e.target) <= e.tol;
            }
        } else if (e.type == "divergence") {
            r.actual = static_cast<double>(metrics.max_assignment_divergence) * 1e-6;
            r.pass = r.actual <= e.target;
        }
        std::ostringstream d;
        d << "actual=" << r.actual << " target=" << e.target;
        if (e.tol > 0) d << " tol=" << e.tol;
        if (r.detail.empty()) r.detail = d.str();
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace themis
