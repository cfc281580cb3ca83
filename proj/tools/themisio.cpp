// Command-line front end: evaluate sharing policies on job tables, run
// simulation scenarios, and compare schedulers on the same workload.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "themis/error.hpp"
#include "themis/policy.hpp"
#include "themis/scenario.hpp"
#include "themis/sim.hpp"

namespace fs = std::filesystem;
using namespace themis;

namespace {

int cmd_policy_eval(const std::string& policy_text, const std::string& table_file,
                    bool show_matrices) {
    std::ifstream in(table_file);
    if (!in) {
        std::cerr << "error: cannot open table file '" << table_file << "'\n";
        return 2;
    }
    PolicySpec policy = parse_policy(policy_text);
    JobStatusTable table = JobStatusTable::from_text(in);
    if (show_matrices) {
        for (const TransitionMatrix& m : build_transition_matrices(policy, table)) {
            std::cout << "# matrix " << m.rows.size() << "x" << m.cols.size() << "\n#        ";
            for (const auto& c : m.cols) std::cout << ' ' << c;
            std::cout << '\n';
            for (std::size_t r = 0; r < m.rows.size(); ++r) {
                std::cout << "# " << m.rows[r] << ':';
                for (double v : m.values[r]) std::cout << ' ' << v;
                std::cout << '\n';
            }
        }
    }
    TokenAssignment a = compute_assignment(policy, table);
    for (const auto& [job, p] : a.probabilities) {
        std::cout << job << ' ' << std::setprecision(10) << p << '\n';
    }
    return 0;
}

void write_outputs(const Metrics& m, const std::string& out_dir, const std::string& tag,
                   bool trace) {
    if (out_dir.empty()) return;
    fs::create_directories(out_dir);
    std::string prefix = out_dir + "/" + (tag.empty() ? "" : tag + "_");
    std::ofstream(prefix + "windows.csv") << m.windows_csv();
    std::ofstream(prefix + "summary.csv") << m.summary_csv();
    if (trace) std::ofstream(prefix + "trace.csv") << m.trace_csv();
}

int cmd_simulate(const std::string& scenario_file, std::uint64_t seed, bool seed_set,
                 const std::string& out_dir, bool trace) {
    Scenario sc = load_scenario_file(scenario_file);
    if (seed_set) sc.config.seed = seed;
    sc.config.record_trace = trace;
    Metrics m = run_simulation(sc.config);
    write_outputs(m, out_dir, "", trace);

    std::cout << "total_bytes " << static_cast<std::uint64_t>(m.total_bytes_all()) << '\n';
    for (const auto& [job, bytes] : m.total_bytes) {
        std::cout << "job " << job << " bytes " << static_cast<std::uint64_t>(bytes) << " ops "
                  << m.total_ops.at(job) << '\n';
    }
    bool ok = true;
    for (const ExpectationResult& r : evaluate_expectations(sc, m)) {
        std::cout << (r.pass ? "PASS" : "FAIL") << ' ' << r.name << " (" << r.detail << ")\n";
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}

int cmd_compare(const std::string& scenario_file, const std::string& policies_arg,
                const std::string& out_dir) {
    std::vector<std::string> policies;
    std::stringstream ss(policies_arg);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) policies.push_back(item);
    }
    if (policies.size() < 2) {
        std::cerr << "error: --policies needs at least two comma-separated entries\n";
        return 2;
    }
    Scenario sc = load_scenario_file(scenario_file);

    std::ostringstream csv;
    csv << "policy,total_bytes";
    for (const WorkloadSpec& j : sc.config.jobs) {
        csv << ',' << j.job_id << "_bytes," << j.job_id << "_share_std";
    }
    csv << ",divergence_s\n";

    double from = 0.0, to = sc.config.duration_s;
    // Sharing-phase window: overlap of all job activity spans, minus the
    // 2 s startup transient.
    for (const WorkloadSpec& j : sc.config.jobs) {
        from = std::max(from, j.start_offset_s);
        if (j.run_length_s > 0) to = std::min(to, j.start_offset_s + j.run_length_s);
    }
    from += 2.0;

    for (const std::string& p : policies) {
        SimConfig cfg = sc.config; // identical workload and seed per policy
        std::string name = p;
        if (p.rfind("themis", 0) == 0) {
            cfg.scheduler = SchedulerKind::themis;
            auto colon = p.find(':');
            if (colon != std::string::npos) cfg.policy_text = p.substr(colon + 1);
        } else {
            cfg.scheduler = scheduler_kind_from_string(p);
        }
        Metrics m = run_simulation(cfg);
        write_outputs(m, out_dir, name, false);
        csv << name << ',' << static_cast<std::uint64_t>(m.total_bytes_all());
        for (const WorkloadSpec& j : sc.config.jobs) {
            csv << ',' << static_cast<std::uint64_t>(m.bytes_in(j.job_id, 0.0, 1e18)) << ','
                << std::setprecision(6) << m.share_std(j.job_id, from, to);
        }
        csv << ',' << static_cast<double>(m.max_assignment_divergence) * 1e-6 << '\n';
    }
    std::cout << csv.str();
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream(out_dir + "/compare.csv") << csv.str();
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"policy-driven fair-share I/O scheduling simulator"};
    app.require_subcommand(1);

    std::string policy_text, table_file, scenario_file, out_dir, policies_arg;
    bool show_matrices = false, trace = false;
    std::uint64_t seed = 0;

    auto* eval = app.add_subcommand("policy-eval", "evaluate a policy on a job table");
    eval->add_option("policy", policy_text, "policy text, e.g. user-then-size-fair")->required();
    eval->add_option("table", table_file, "job table file")->required();
    eval->add_flag("--show-matrices", show_matrices, "print per-level transition matrices");

    auto* sim = app.add_subcommand("simulate", "run a scenario");
    sim->add_option("scenario", scenario_file, "scenario JSON file")->required();
    auto* seed_opt = sim->add_option("--seed", seed, "override scenario seed");
    sim->add_option("--out", out_dir, "output directory for CSV files");
    sim->add_flag("--trace", trace, "export the dispatch trace");

    auto* cmp = app.add_subcommand("compare", "run one scenario under several schedulers");
    cmp->add_option("scenario", scenario_file, "scenario JSON file")->required();
    cmp->add_option("--policies", policies_arg, "comma-separated, e.g. fifo,gift,tbf,themis:job-fair")
        ->required();
    cmp->add_option("--out", out_dir, "output directory for CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(eval)) {
            return cmd_policy_eval(policy_text, table_file, show_matrices);
        }
        if (app.got_subcommand(sim)) {
            return cmd_simulate(scenario_file, seed, seed_opt->count() > 0, out_dir, trace);
        }
        return cmd_compare(scenario_file, policies_arg, out_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
