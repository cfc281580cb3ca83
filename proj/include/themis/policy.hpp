#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "themis/table.hpp"

namespace themis {

// One level of a sharing policy. group/user split equally among the
// entities in scope; job splits equally among a scope's jobs; size and
// priority split proportionally to node_count / priority_weight.
enum class LevelKind { group, user, job, size, priority };

const char* level_kind_name(LevelKind k);

struct PolicySpec {
    std::vector<LevelKind> levels;

    std::string to_string() const;
};

// Grammar: one or more level kinds joined by "-then-" (plain "-" chaining
// is an alias), suffixed "-fair". If the final kind is group or user an
// implicit trailing "job" leaf is appended so the last matrix columns are
// jobs. Throws ParseError naming the offending token on unknown kinds,
// repeats, or group appearing after user.
PolicySpec parse_policy(const std::string& text);

// Row-stochastic transition matrix for one policy level. Rows are the
// scopes produced by the previous levels (a single synthetic root for
// level 0); columns are the entities at this level, each owned by exactly
// one scope.
struct TransitionMatrix {
    std::vector<std::string> rows; // scope labels
    std::vector<std::string> cols; // entity ids at this level
    std::vector<std::vector<double>> values;
};

// One matrix per policy level, built from the active jobs in the table.
// Scopes with no active jobs are dropped. Throws EmptyError when the
// table has no active jobs.
std::vector<TransitionMatrix> build_transition_matrices(const PolicySpec& policy,
                                                        const JobStatusTable& table);

// Per-job dispatch probability vector, the chain product of the level
// matrices. Inactive jobs carry probability 0.
struct TokenAssignment {
    std::map<std::string, double> probabilities;
    std::uint64_t source_epoch = 0;
};

TokenAssignment compute_assignment(const PolicySpec& policy, const JobStatusTable& table);

} // namespace themis
