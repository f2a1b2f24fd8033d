#pragma once

#include <cstdio>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rlink/beta_rl.hpp"
#include "rlink/comparison.hpp"
#include "rlink/core.hpp"
#include "rlink/estimators.hpp"
#include "rlink/io.hpp"

namespace rlink {

inline constexpr double kCandidateThreshold = 0.01;
inline constexpr std::size_t kTopCandidates = 5;

struct ReviewCandidate {
    std::uint32_t i = 0;
    double prob = 0.0;
    std::vector<std::optional<std::string>> values;
    std::vector<int> levels;  // per comparison field, -1 unobserved
};

/// One rejected file-2 record. The task id is the record's 1-based index.
struct ReviewTask {
    std::size_t id = 0;
    std::uint32_t j = 0;
    std::vector<std::optional<std::string>> values;
    std::vector<ReviewCandidate> candidates;  // descending probability
    double nonmatch_prob = 0.0;

    bool has_candidate(std::uint32_t i) const;
};

/// Tasks for every rejected record. Candidates are all i with probability above
/// kCandidateThreshold plus the kTopCandidates most probable. Files may be null.
std::vector<ReviewTask> build_tasks(const LinkageEstimate& est, const PosteriorSummary& posterior,
                                    const ComparisonData& data, const DataFile* file1, const DataFile* file2);

enum class ReviewAction { Link, NonLink, Skip };
std::string_view to_string(ReviewAction a);
ReviewAction review_action_from_string(std::string_view s);

struct ReviewDecision {
    std::size_t task = 0;
    ReviewAction action = ReviewAction::Skip;
    std::optional<std::uint32_t> i;  // 0-based, link only
    std::string note;
    std::string timestamp;
    bool supersede = false;

    /// Same task, action and target.
    bool same_outcome(const ReviewDecision& other) const;
    Json to_json() const;
    /// Reads a decision document; link targets are 1-based in the document.
    static ReviewDecision from_json(const Json& doc);
};

/// Applies human decisions to rejected entries. Later decisions for a task replace
/// earlier ones. Skips leave the record rejected. Throws ValidationError listing every
/// conflict if the result would not be one-to-one. With a posterior, probabilities and
/// expected losses of changed entries are recomputed.
LinkageEstimate merge_decisions(const LinkageEstimate& est, const std::vector<ReviewDecision>& decisions,
                                const PosteriorSummary* posterior = nullptr);

enum class SubmitStatus { Committed, Duplicate, NotFound, Conflict, Invalid };
std::string_view to_string(SubmitStatus s);

struct SubmitResult {
    SubmitStatus status = SubmitStatus::Invalid;
    std::string message;
    std::optional<ReviewDecision> decision;  // committed or existing decision
};

/// Clerical-review state over an append-only decision log.
///
/// Submissions are serialized and fsynced to the log before they are acknowledged.
/// Readers take immutable snapshots that are never modified after publication.
class ReviewSession {
  public:
    struct Snapshot {
        std::vector<std::optional<ReviewDecision>> decided;  // per task position
        std::vector<ReviewDecision> log;                     // committed, in order
        std::vector<std::int64_t> reviewed_owner;            // file-1 record -> task position linking it, or -1
        std::size_t num_decided = 0;
    };

    /// Opens or creates the log and replays it. An empty path keeps decisions in memory.
    ReviewSession(LinkageEstimate est, PosteriorSummary posterior, std::vector<ReviewTask> tasks,
                  std::string log_path);
    ~ReviewSession();
    ReviewSession(const ReviewSession&) = delete;
    ReviewSession& operator=(const ReviewSession&) = delete;

    const LinkageEstimate& estimate() const { return est_; }
    const std::vector<ReviewTask>& tasks() const { return tasks_; }
    const ReviewTask* find_task(std::size_t id) const;
    std::shared_ptr<const Snapshot> snapshot() const;

    SubmitResult submit(ReviewDecision d);
    LinkageEstimate merged() const;

    Json task_json(const ReviewTask& task, const Snapshot& snap) const;
    Json progress_json() const;
    /// Names used when rendering record values and comparison levels.
    void set_field_names(std::vector<std::string> record_fields, std::vector<std::string> comparison_fields);

  private:
    std::optional<std::size_t> position(std::size_t id) const;
    /// Checks a decision against a snapshot; returns the status it would get.
    SubmitResult check(const ReviewDecision& d, const Snapshot& snap) const;
    void apply(Snapshot& snap, const ReviewDecision& d) const;
    void append(const ReviewDecision& d);

    LinkageEstimate est_;
    PosteriorSummary posterior_;
    std::vector<ReviewTask> tasks_;
    std::vector<std::int64_t> auto_owner_;  // file-1 record -> automatically linked j, or -1
    std::vector<std::string> field_names_;
    std::vector<std::string> comparison_names_;
    std::string log_path_;
    std::FILE* log_ = nullptr;
    std::mutex writer_;
    std::shared_ptr<const Snapshot> snap_;  // accessed only through atomic load/store
};

/// Current UTC time as an ISO 8601 string.
std::string utc_timestamp();

}  // namespace rlink
