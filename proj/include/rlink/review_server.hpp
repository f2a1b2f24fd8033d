#pragma once

#include <memory>
#include <string>

#include "rlink/review.hpp"

namespace rlink {

/// HTTP front end of a review session.
///
///   GET  /api/tasks?offset=&limit=   pending tasks, paginated
///   GET  /api/tasks/{id}             one task, pending or decided
///   POST /api/decisions              {"task_id", "decision", "record", "note", "supersede"}
///   GET  /api/progress               decided and pending counts
///   GET  /api/export                 merged estimate
///   GET  /api/health
class ReviewServer {
  public:
    explicit ReviewServer(ReviewSession& session);
    ~ReviewServer();

    /// Binds to a free port and returns it, or -1.
    int bind_any_port(const std::string& host = "127.0.0.1");
    bool bind(const std::string& host, int port);
    /// Serves until stop(); call after a bind.
    bool listen();
    void stop();
    void wait_until_ready() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Export document for an estimate: counts plus one entry per record.
Json estimate_to_json(const LinkageEstimate& est);

}  // namespace rlink
