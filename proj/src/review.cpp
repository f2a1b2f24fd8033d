#include "rlink/review.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace rlink {

bool ReviewTask::has_candidate(std::uint32_t i) const {
    return std::any_of(candidates.begin(), candidates.end(), [&](const auto& c) { return c.i == i; });
}

std::vector<ReviewTask> build_tasks(const LinkageEstimate& est, const PosteriorSummary& posterior,
                                    const ComparisonData& data, const DataFile* file1, const DataFile* file2) {
    if (est.n2() != posterior.n2() || est.n1 != posterior.n1()) {
        throw ValidationError("estimate and posterior differ in size");
    }
    if (data.n1() != est.n1 || data.n2() != est.n2()) throw ValidationError("estimate and comparison data differ in size");
    if ((file1 && file1->size() != est.n1) || (file2 && file2->size() != est.n2())) {
        throw ValidationError("datafiles do not match the estimate");
    }
    std::vector<ReviewTask> tasks;
    for (std::size_t j = 0; j < est.n2(); ++j) {
        if (est.entries[j].decision != Decision::Reject) continue;
        ReviewTask task;
        task.id = j + 1;
        task.j = static_cast<std::uint32_t>(j);
        task.nonmatch_prob = posterior.nonmatch(j);
        if (file2) task.values = file2->record(j).values;
        std::vector<PosteriorSummary::Entry> entries(posterior.column(j).begin(), posterior.column(j).end());
        std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.prob > b.prob; });
        for (std::size_t r = 0; r < entries.size(); ++r) {
            if (r >= kTopCandidates && entries[r].prob <= kCandidateThreshold) break;
            ReviewCandidate c;
            c.i = entries[r].i;
            c.prob = entries[r].prob;
            if (file1) c.values = file1->record(c.i).values;
            const auto k = data.find_pair(c.i, j);
            for (std::size_t f = 0; f < data.num_fields(); ++f) c.levels.push_back(k ? data.level(*k, f) : -1);
            task.candidates.push_back(std::move(c));
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

std::string_view to_string(ReviewAction a) {
    switch (a) {
        case ReviewAction::Link: return "link";
        case ReviewAction::NonLink: return "non-link";
        case ReviewAction::Skip: return "skip";
    }
    return "skip";
}

ReviewAction review_action_from_string(std::string_view s) {
    if (s == "link") return ReviewAction::Link;
    if (s == "non-link" || s == "nonlink") return ReviewAction::NonLink;
    if (s == "skip") return ReviewAction::Skip;
    throw ValidationError("unknown review decision '" + std::string(s) + "'");
}

bool ReviewDecision::same_outcome(const ReviewDecision& other) const {
    return task == other.task && action == other.action && i == other.i;
}

Json ReviewDecision::to_json() const {
    Json doc{{"task_id", task},
             {"decision", std::string(to_string(action))},
             {"note", note},
             {"timestamp", timestamp},
             {"supersede", supersede}};
    doc["record"] = i ? Json(*i + 1) : Json(nullptr);
    return doc;
}

ReviewDecision ReviewDecision::from_json(const Json& doc) {
    ReviewDecision d;
    try {
        if (!doc.is_object()) throw ValidationError("decision must be an object");
        const auto& id = doc.at("task_id");
        if (!id.is_number_integer() || id.get<std::int64_t>() < 1) {
            throw ValidationError("task_id must be a positive integer");
        }
        d.task = id.get<std::size_t>();
        d.action = review_action_from_string(doc.at("decision").get<std::string>());
        if (d.action == ReviewAction::Link) {
            const auto& r = doc.at("record");
            if (!r.is_number_integer() || r.get<std::int64_t>() < 1) throw ValidationError("record must be a positive integer");
            d.i = static_cast<std::uint32_t>(r.get<std::int64_t>() - 1);
        } else if (doc.contains("record") && !doc["record"].is_null()) {
            throw ValidationError("only link decisions name a record");
        }
        d.note = doc.value("note", std::string());
        d.timestamp = doc.value("timestamp", std::string());
        d.supersede = doc.value("supersede", false);
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed decision: ") + e.what());
    }
    return d;
}

LinkageEstimate merge_decisions(const LinkageEstimate& est, const std::vector<ReviewDecision>& decisions,
                                const PosteriorSummary* posterior) {
    std::map<std::size_t, const ReviewDecision*> last;
    for (const auto& d : decisions) {
        if (d.task == 0 || d.task > est.n2()) throw ValidationError("decision for unknown task " + std::to_string(d.task));
        if (est.entries[d.task - 1].decision != Decision::Reject) {
            throw ValidationError("task " + std::to_string(d.task) + " is not a rejected record");
        }
        if (d.action == ReviewAction::Link && (!d.i || *d.i >= est.n1)) {
            throw ValidationError("task " + std::to_string(d.task) + " links to an invalid record");
        }
        last[d.task] = &d;
    }
    LinkageEstimate out = est;
    for (const auto& [task, d] : last) {
        auto& e = out.entries[task - 1];
        const auto j = task - 1;
        if (d->action == ReviewAction::Skip) continue;
        e.decision = d->action == ReviewAction::Link ? Decision::Link : Decision::NonLink;
        e.i = d->i;
        if (posterior) {
            e.prob = e.i ? posterior->prob(*e.i, j) : posterior->nonmatch(j);
            e.expected_loss = expected_loss(j, e.decision, e.i, *posterior, est.loss);
        }
    }
    std::map<std::uint32_t, std::vector<std::size_t>> owners;
    for (std::size_t j = 0; j < out.n2(); ++j) {
        if (out.entries[j].decision == Decision::Link) owners[*out.entries[j].i].push_back(j);
    }
    std::string conflicts;
    for (const auto& [i, js] : owners) {
        if (js.size() < 2) continue;
        conflicts += "\n  file-1 record " + std::to_string(i + 1) + " linked by records";
        for (auto j : js) conflicts += " " + std::to_string(j + 1);
    }
    if (!conflicts.empty()) throw ValidationError("merge refused, decisions are not one-to-one:" + conflicts);
    if (!est.estimator.empty()) out.estimator = est.estimator + "+review";
    return out;
}

std::string_view to_string(SubmitStatus s) {
    switch (s) {
        case SubmitStatus::Committed: return "committed";
        case SubmitStatus::Duplicate: return "duplicate";
        case SubmitStatus::NotFound: return "not-found";
        case SubmitStatus::Conflict: return "conflict";
        case SubmitStatus::Invalid: return "invalid";
    }
    return "invalid";
}

std::string utc_timestamp() {
    const auto t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// -------------------------------------------------------------------------
//     Session
// -------------------------------------------------------------------------

ReviewSession::ReviewSession(LinkageEstimate est, PosteriorSummary posterior, std::vector<ReviewTask> tasks,
                             std::string log_path)
    : est_(std::move(est)), posterior_(std::move(posterior)), tasks_(std::move(tasks)), log_path_(std::move(log_path)) {
    est_.validate();
    posterior_.drop_samples();
    for (std::size_t t = 1; t < tasks_.size(); ++t) {
        if (tasks_[t].id <= tasks_[t - 1].id) throw ValidationError("review tasks must be ordered by id");
    }
    auto_owner_.assign(est_.n1, -1);
    for (std::size_t j = 0; j < est_.n2(); ++j) {
        const auto& e = est_.entries[j];
        if (e.decision == Decision::Link) auto_owner_[*e.i] = static_cast<std::int64_t>(j);
    }
    auto snap = std::make_shared<Snapshot>();
    snap->decided.resize(tasks_.size());
    snap->reviewed_owner.assign(est_.n1, -1);

    if (!log_path_.empty()) {
        std::ifstream in(log_path_, std::ios::binary);
        std::string line;
        std::vector<std::string> lines;
        while (std::getline(in, line)) lines.push_back(line);
        in.close();
        std::uintmax_t offset = 0;
        for (std::size_t lineno = 1; lineno <= lines.size(); ++lineno) {
            const auto& l = lines[lineno - 1];
            const auto start = offset;
            offset += l.size() + 1;
            if (l.find_first_not_of(" \t\r") == std::string::npos) continue;
            ReviewDecision d;
            try {
                d = ReviewDecision::from_json(Json::parse(l));
            } catch (const std::exception& e) {
                if (lineno == lines.size()) {
                    // Drop the torn tail so later appends start on a fresh line.
                    std::filesystem::resize_file(log_path_, start);
                    break;
                }
                throw ValidationError("decision log line " + std::to_string(lineno) + ": " + e.what());
            }
            const auto r = check(d, *snap);
            if (r.status != SubmitStatus::Committed) {
                throw ValidationError("decision log line " + std::to_string(lineno) + " does not replay: " + r.message);
            }
            apply(*snap, d);
        }
        log_ = std::fopen(log_path_.c_str(), "a");
        if (!log_) throw std::runtime_error("cannot open decision log '" + log_path_ + "': " + std::strerror(errno));
        std::error_code ec;
        const auto size = std::filesystem::file_size(log_path_, ec);
        if (!ec && size > 0 && size + 1 == offset) std::fputc('\n', log_);
    }
    std::atomic_store(&snap_, std::shared_ptr<const Snapshot>(std::move(snap)));
}

ReviewSession::~ReviewSession() {
    if (log_) std::fclose(log_);
}

void ReviewSession::set_field_names(std::vector<std::string> record_fields, std::vector<std::string> comparison_fields) {
    field_names_ = std::move(record_fields);
    comparison_names_ = std::move(comparison_fields);
}

std::optional<std::size_t> ReviewSession::position(std::size_t id) const {
    auto it = std::lower_bound(tasks_.begin(), tasks_.end(), id, [](const ReviewTask& t, std::size_t v) { return t.id < v; });
    if (it == tasks_.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - tasks_.begin());
}

const ReviewTask* ReviewSession::find_task(std::size_t id) const {
    const auto p = position(id);
    return p ? &tasks_[*p] : nullptr;
}

std::shared_ptr<const ReviewSession::Snapshot> ReviewSession::snapshot() const { return std::atomic_load(&snap_); }

SubmitResult ReviewSession::check(const ReviewDecision& d, const Snapshot& snap) const {
    const auto pos = position(d.task);
    if (!pos) return {SubmitStatus::NotFound, "no task " + std::to_string(d.task), std::nullopt};
    const auto& task = tasks_[*pos];
    if (d.action == ReviewAction::Link) {
        if (!d.i) return {SubmitStatus::Invalid, "link decision without a record", std::nullopt};
        if (!task.has_candidate(*d.i)) {
            return {SubmitStatus::Invalid, "record " + std::to_string(*d.i + 1) + " is not a candidate of task " +
                                               std::to_string(d.task),
                    std::nullopt};
        }
    } else if (d.i) {
        return {SubmitStatus::Invalid, "only link decisions name a record", std::nullopt};
    }
    const auto& prev = snap.decided[*pos];
    if (prev) {
        if (prev->same_outcome(d)) return {SubmitStatus::Duplicate, "already recorded", prev};
        if (!d.supersede) {
            return {SubmitStatus::Conflict, "task " + std::to_string(d.task) + " is already decided; set supersede to change it",
                    prev};
        }
    }
    if (d.action == ReviewAction::Link) {
        const auto i = *d.i;
        if (auto_owner_[i] >= 0) {
            return {SubmitStatus::Conflict,
                    "record " + std::to_string(i + 1) + " is already linked to record " + std::to_string(auto_owner_[i] + 1),
                    std::nullopt};
        }
        const auto owner = snap.reviewed_owner[i];
        if (owner >= 0 && static_cast<std::size_t>(owner) != *pos) {
            return {SubmitStatus::Conflict,
                    "record " + std::to_string(i + 1) + " was already linked by task " + std::to_string(tasks_[owner].id),
                    std::nullopt};
        }
    }
    return {SubmitStatus::Committed, "", d};
}

void ReviewSession::apply(Snapshot& snap, const ReviewDecision& d) const {
    const auto pos = *position(d.task);
    auto& prev = snap.decided[pos];
    if (prev && prev->action == ReviewAction::Link) snap.reviewed_owner[*prev->i] = -1;
    if (!prev) ++snap.num_decided;
    prev = d;
    if (d.action == ReviewAction::Link) snap.reviewed_owner[*d.i] = static_cast<std::int64_t>(pos);
    snap.log.push_back(d);
}

void ReviewSession::append(const ReviewDecision& d) {
    if (!log_) return;
    const auto line = d.to_json().dump() + "\n";
    if (std::fwrite(line.data(), 1, line.size(), log_) != line.size() || std::fflush(log_) != 0 ||
        ::fsync(::fileno(log_)) != 0) {
        throw std::runtime_error("cannot persist decision to '" + log_path_ + "': " + std::strerror(errno));
    }
}

SubmitResult ReviewSession::submit(ReviewDecision d) {
    std::lock_guard lock(writer_);
    const auto current = snapshot();
    auto r = check(d, *current);
    if (r.status != SubmitStatus::Committed) return r;
    if (d.timestamp.empty()) d.timestamp = utc_timestamp();
    append(d);
    auto next = std::make_shared<Snapshot>(*current);
    apply(*next, d);
    std::atomic_store(&snap_, std::shared_ptr<const Snapshot>(std::move(next)));
    r.decision = d;
    return r;
}

LinkageEstimate ReviewSession::merged() const { return merge_decisions(est_, snapshot()->log, &posterior_); }

namespace {

Json values_json(const std::vector<std::optional<std::string>>& values, const std::vector<std::string>& names) {
    Json out = Json::object();
    for (std::size_t f = 0; f < values.size(); ++f) {
        const auto name = f < names.size() ? names[f] : "field" + std::to_string(f + 1);
        out[name] = values[f] ? Json(*values[f]) : Json(nullptr);
    }
    return out;
}

}  // namespace

Json ReviewSession::task_json(const ReviewTask& task, const Snapshot& snap) const {
    const auto pos = *position(task.id);
    Json candidates = Json::array();
    for (const auto& c : task.candidates) {
        Json levels = Json::object();
        for (std::size_t f = 0; f < c.levels.size(); ++f) {
            const auto name = f < comparison_names_.size() ? comparison_names_[f] : "field" + std::to_string(f + 1);
            levels[name] = c.levels[f] >= 0 ? Json(c.levels[f]) : Json(nullptr);
        }
        candidates.push_back({{"record", c.i + 1},
                              {"probability", c.prob},
                              {"fields", values_json(c.values, field_names_)},
                              {"levels", levels}});
    }
    const auto& d = snap.decided[pos];
    return Json{{"id", task.id},
                {"record", task.j + 1},
                {"fields", values_json(task.values, field_names_)},
                {"candidates", candidates},
                {"nonmatch_probability", task.nonmatch_prob},
                {"status", d ? "decided" : "pending"},
                {"decision", d ? d->to_json() : Json(nullptr)}};
}

Json ReviewSession::progress_json() const {
    const auto snap = snapshot();
    std::size_t links = 0, nonlinks = 0, skips = 0;
    for (const auto& d : snap->decided) {
        if (!d) continue;
        if (d->action == ReviewAction::Link) ++links;
        else if (d->action == ReviewAction::NonLink) ++nonlinks;
        else ++skips;
    }
    return Json{{"total", tasks_.size()},
                {"decided", snap->num_decided},
                {"pending", tasks_.size() - snap->num_decided},
                {"links", links},
                {"nonlinks", nonlinks},
                {"skips", skips},
                {"log_entries", snap->log.size()}};
}

}  // namespace rlink
