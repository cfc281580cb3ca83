#include "themis/policy.hpp"

#include <algorithm>
#include <numeric>

#include "themis/error.hpp"

namespace themis {

const char* level_kind_name(LevelKind k) {
    switch (k) {
        case LevelKind::group: return "group";
        case LevelKind::user: return "user";
        case LevelKind::job: return "job";
        case LevelKind::size: return "size";
        case LevelKind::priority: return "priority";
    }
    return "?";
}

std::string PolicySpec::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (i) out += "-then-";
        out += level_kind_name(levels[i]);
    }
    return out + "-fair";
}

namespace {

bool is_leaf(LevelKind k) {
    return k == LevelKind::job || k == LevelKind::size || k == LevelKind::priority;
}

LevelKind kind_from_token(const std::string& tok) {
    if (tok == "group") return LevelKind::group;
    if (tok == "user") return LevelKind::user;
    if (tok == "job") return LevelKind::job;
    if (tok == "size") return LevelKind::size;
    if (tok == "priority") return LevelKind::priority;
    throw ParseError("unknown policy level '" + tok + "'");
}

std::vector<std::string> split_tokens(std::string body) {
    // "-then-" chaining and plain "-" chaining are equivalent.
    std::vector<std::string> toks;
    std::size_t pos = 0;
    while (pos <= body.size()) {
        std::size_t dash = body.find('-', pos);
        std::string tok = body.substr(pos, dash == std::string::npos ? dash : dash - pos);
        if (tok != "then") toks.push_back(tok);
        if (dash == std::string::npos) break;
        pos = dash + 1;
    }
    return toks;
}

} // namespace

PolicySpec parse_policy(const std::string& text) {
    if (text.empty()) throw ParseError("empty policy");
    const std::string suffix = "-fair";
    if (text.size() <= suffix.size() ||
        text.compare(text.size() - suffix.size(), suffix.size(), suffix) != 0) {
        throw ParseError("policy '" + text + "' must end in '-fair'");
    }
    std::string body = text.substr(0, text.size() - suffix.size());

    PolicySpec spec;
    for (const std::string& tok : split_tokens(body)) {
        if (tok.empty()) throw ParseError("policy '" + text + "': empty level token");
        LevelKind k = kind_from_token(tok);
        for (LevelKind seen : spec.levels) {
            if (seen == k) throw ParseError("policy level '" + tok + "' repeated");
        }
        if (!spec.levels.empty()) {
            LevelKind prev = spec.levels.back();
            if (is_leaf(prev)) {
                throw ParseError("level '" + tok + "' after leaf level '" +
                                 level_kind_name(prev) + "'");
            }
            if (k == LevelKind::group && prev == LevelKind::user) {
                throw ParseError("'group' may not appear after 'user'");
            }
        }
        spec.levels.push_back(k);
    }
    if (spec.levels.empty()) throw ParseError("policy '" + text + "' names no levels");
    if (!is_leaf(spec.levels.back())) {
        spec.levels.push_back(LevelKind::job);
    }
    return spec;
}

namespace {

struct Scope {
    std::string label;
    std::vector<const JobInfo*> jobs;
};

double entity_weight(LevelKind k, const JobInfo& job) {
    switch (k) {
        case LevelKind::size: return static_cast<double>(job.node_count);
        case LevelKind::priority: return job.priority_weight;
        default: return 1.0;
    }
}

const std::string& entity_key(LevelKind k, const JobInfo& job) {
    switch (k) {
        case LevelKind::group: return job.group_id;
        case LevelKind::user: return job.user_id;
        default: return job.job_id;
    }
}

} // namespace

std::vector<TransitionMatrix> build_transition_matrices(const PolicySpec& policy,
                                                        const JobStatusTable& table) {
    std::vector<const JobInfo*> active = table.active_jobs();
    if (active.empty()) throw EmptyError("no active jobs");

    std::vector<TransitionMatrix> matrices;
    std::vector<Scope> scopes{{"*", active}};

    for (LevelKind kind : policy.levels) {
        TransitionMatrix m;
        std::vector<Scope> next;
        std::vector<std::size_t> col_row;    // owning row of each column
        std::vector<double> col_weight;
        for (std::size_t r = 0; r < scopes.size(); ++r) {
            const Scope& sc = scopes[r];
            m.rows.push_back(sc.label);
            // Partition the scope's jobs by this level's entity key; std::map
            // keeps entity order deterministic.
            std::map<std::string, std::vector<const JobInfo*>> parts;
            for (const JobInfo* j : sc.jobs) parts[entity_key(kind, *j)].push_back(j);
            for (auto& [key, jobs] : parts) {
                // Job-keyed levels label columns with the plain job id so the
                // final matrix maps directly onto jobs; group/user entities are
                // scoped since the same user id may exist under two groups.
                std::string label = is_leaf(kind) ? key
                                    : (sc.label == "*" ? key : sc.label + "/" + key);
                double w = 0.0;
                for (const JobInfo* j : jobs) {
                    if (is_leaf(kind)) {
                        w = entity_weight(kind, *j); // job-keyed: one job per entity
                    }
                }
                if (!is_leaf(kind)) w = 1.0; // intermediate levels split equally
                m.cols.push_back(label);
                col_row.push_back(r);
                col_weight.push_back(w);
                next.push_back({label, std::move(jobs)});
            }
        }
        m.values.assign(m.rows.size(), std::vector<double>(m.cols.size(), 0.0));
        std::vector<double> row_total(m.rows.size(), 0.0);
        for (std::size_t c = 0; c < m.cols.size(); ++c) row_total[col_row[c]] += col_weight[c];
        for (std::size_t c = 0; c < m.cols.size(); ++c) {
            m.values[col_row[c]][c] = col_weight[c] / row_total[col_row[c]];
        }
        matrices.push_back(std::move(m));
        scopes = std::move(next);
    }
    return matrices;
}

TokenAssignment compute_assignment(const PolicySpec& policy, const JobStatusTable& table) {
    std::vector<TransitionMatrix> matrices = build_transition_matrices(policy, table);

    std::vector<double> v{1.0};
    for (const TransitionMatrix& m : matrices) {
        std::vector<double> next(m.cols.size(), 0.0);
        for (std::size_t r = 0; r < m.rows.size(); ++r) {
            for (std::size_t c = 0; c < m.cols.size(); ++c) {
                next[c] += v[r] * m.values[r][c];
            }
        }
        v = std::move(next);
    }

    TokenAssignment out;
    out.source_epoch = table.epoch();
    const TransitionMatrix& last = matrices.back();
    for (std::size_t c = 0; c < last.cols.size(); ++c) {
        out.probabilities[last.cols[c]] = v[c];
    }
    for (const auto& [id, job] : table.entries()) {
        if (job.status == JobStatus::inactive) out.probabilities[id] = 0.0;
    }
    return out;
}

} // namespace themis
