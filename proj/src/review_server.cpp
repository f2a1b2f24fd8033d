#include "rlink/review_server.hpp"

#include <httplib.h>

#include <charconv>

namespace rlink {

namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    send_json(res, status, Json{{"error", code}, {"message", message}});
}

std::optional<std::size_t> parse_count(const std::string& s) {
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

int http_status(SubmitStatus s) {
    switch (s) {
        case SubmitStatus::Committed: return 201;
        case SubmitStatus::Duplicate: return 200;
        case SubmitStatus::NotFound: return 404;
        case SubmitStatus::Conflict: return 409;
        case SubmitStatus::Invalid: return 400;
    }
    return 500;
}

}  // namespace

Json estimate_to_json(const LinkageEstimate& est) {
    Json entries = Json::array();
    for (std::size_t j = 0; j < est.n2(); ++j) {
        const auto& e = est.entries[j];
        entries.push_back({{"record", j + 1},
                           {"decision", std::string(to_string(e.decision))},
                           {"link", e.i ? Json(*e.i + 1) : Json(nullptr)},
                           {"probability", e.prob},
                           {"expected_loss", e.expected_loss}});
    }
    return Json{{"estimator", est.estimator},
                {"loss", est.loss.to_string()},
                {"n1", est.n1},
                {"n2", est.n2()},
                {"links", est.count(Decision::Link)},
                {"nonlinks", est.count(Decision::NonLink)},
                {"rejections", est.count(Decision::Reject)},
                {"entries", entries}};
}

struct ReviewServer::Impl {
    ReviewSession& session;
    httplib::Server server;

    explicit Impl(ReviewSession& s) : session(s) { routes(); }

    void routes() {
        server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, Json{{"status", "ok"}});
        });

        server.Get("/api/tasks", [this](const httplib::Request& req, httplib::Response& res) {
            std::size_t offset = 0, limit = 50;
            if (req.has_param("offset")) {
                auto v = parse_count(req.get_param_value("offset"));
                if (!v) return send_error(res, 400, "bad-request", "offset must be a non-negative integer");
                offset = *v;
            }
            if (req.has_param("limit")) {
                auto v = parse_count(req.get_param_value("limit"));
                if (!v || *v == 0 || *v > 1000) return send_error(res, 400, "bad-request", "limit must be in 1..1000");
                limit = *v;
            }
            const auto snap = session.snapshot();
            const auto& tasks = session.tasks();
            Json items = Json::array();
            std::size_t pending = 0;
            for (std::size_t p = 0; p < tasks.size(); ++p) {
                if (snap->decided[p]) continue;
                if (pending >= offset && items.size() < limit) items.push_back(session.task_json(tasks[p], *snap));
                ++pending;
            }
            send_json(res, 200, Json{{"offset", offset}, {"limit", limit}, {"total", pending}, {"tasks", items}});
        });

        server.Get(R"(/api/tasks/(\d+))", [this](const httplib::Request& req, httplib::Response& res) {
            const auto id = parse_count(req.matches[1]);
            const ReviewTask* task = id ? session.find_task(*id) : nullptr;
            if (!task) return send_error(res, 404, "not-found", "no task " + std::string(req.matches[1]));
            const auto snap = session.snapshot();
            send_json(res, 200, session.task_json(*task, *snap));
        });

        server.Post("/api/decisions", [this](const httplib::Request& req, httplib::Response& res) {
            ReviewDecision d;
            try {
                d = ReviewDecision::from_json(Json::parse(req.body));
            } catch (const std::exception& e) {
                return send_error(res, 400, "bad-request", e.what());
            }
            SubmitResult r;
            try {
                r = session.submit(d);
            } catch (const std::exception& e) {
                return send_error(res, 500, "storage", e.what());
            }
            Json body{{"status", std::string(to_string(r.status))}, {"message", r.message}};
            body["decision"] = r.decision ? r.decision->to_json() : Json(nullptr);
            send_json(res, http_status(r.status), body);
        });

        server.Get("/api/progress", [this](const httplib::Request&, httplib::Response& res) {
            send_json(res, 200, session.progress_json());
        });

        server.Get("/api/export", [this](const httplib::Request&, httplib::Response& res) {
            try {
                send_json(res, 200, estimate_to_json(session.merged()));
            } catch (const ValidationError& e) {
                send_error(res, 409, "conflict", e.what());
            }
        });
    }
};

ReviewServer::ReviewServer(ReviewSession& session) : impl_(std::make_unique<Impl>(session)) {}
ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }
bool ReviewServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }
bool ReviewServer::listen() { return impl_->server.listen_after_bind(); }
void ReviewServer::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}
void ReviewServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace rlink
