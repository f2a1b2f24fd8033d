#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <sstream>
#include <thread>

#include "review_fixture.hpp"
#include "rlink/review_server.hpp"

using namespace rlink;

namespace {

/// Session plus a server listening on an ephemeral port.
struct Running {
    ReviewFixture fx = review_fixture();
    ReviewSession session;
    ReviewServer server;
    int port = -1;
    std::thread thread;

    explicit Running(const std::string& log = "") : session(fx.est, fx.post, fx.tasks, log), server(session) {
        session.set_field_names({"name"}, {"name"});
        port = server.bind_any_port();
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen(); });
        server.wait_until_ready();
    }
    ~Running() {
        server.stop();
        thread.join();
    }
    httplib::Client client() const {
        httplib::Client c("127.0.0.1", port);
        c.set_read_timeout(10, 0);
        return c;
    }
};

Json post_decision(httplib::Client& c, const Json& body, int& status) {
    auto res = c.Post("/api/decisions", body.dump(), "application/json");
    REQUIRE(res);
    status = res->status;
    return Json::parse(res->body);
}

Json get_json(httplib::Client& c, const std::string& path, int expect = 200) {
    auto res = c.Get(path);
    REQUIRE(res);
    CHECK(res->status == expect);
    return Json::parse(res->body);
}

}  // namespace

TEST_SUITE("review_server") {

TEST_CASE("health, tasks and progress") {
    Running r;
    auto c = r.client();
    CHECK(get_json(c, "/api/health")["status"] == "ok");

    const auto page = get_json(c, "/api/tasks");
    CHECK(page["total"] == 3);
    CHECK(page["limit"] == 50);
    REQUIRE(page["tasks"].size() == 3);
    CHECK(page["tasks"][0]["id"] == 2);
    CHECK(page["tasks"][0]["status"] == "pending");
    CHECK(page["tasks"][2]["candidates"][0]["record"] == 3);
    CHECK(page["tasks"][2]["fields"]["name"] == "CYY");

    const auto second = get_json(c, "/api/tasks?offset=1&limit=1");
    REQUIRE(second["tasks"].size() == 1);
    CHECK(second["tasks"][0]["id"] == 3);
    get_json(c, "/api/tasks?limit=0", 400);
    get_json(c, "/api/tasks?limit=1001", 400);
    get_json(c, "/api/tasks?offset=x", 400);

    const auto one = get_json(c, "/api/tasks/4");
    CHECK(one["record"] == 4);
    CHECK(one["nonmatch_probability"] == doctest::Approx(0.48));
    get_json(c, "/api/tasks/1", 404);
    get_json(c, "/api/tasks/77", 404);

    const auto p = get_json(c, "/api/progress");
    CHECK(p["total"] == 3);
    CHECK(p["pending"] == 3);
}

TEST_CASE("decisions over HTTP") {
    Running r;
    auto c = r.client();
    int status = 0;
    auto body = post_decision(c, Json{{"task_id", 2}, {"decision", "link"}, {"record", 2}}, status);
    CHECK(status == 201);
    CHECK(body["status"] == "committed");
    CHECK(body["decision"]["record"] == 2);
    post_decision(c, Json{{"task_id", 2}, {"decision", "link"}, {"record", 2}}, status);
    CHECK(status == 200);
    body = post_decision(c, Json{{"task_id", 2}, {"decision", "non-link"}}, status);
    CHECK(status == 409);
    CHECK(body["decision"]["decision"] == "link");
    post_decision(c, Json{{"task_id", 3}, {"decision", "link"}, {"record", 1}}, status);
    CHECK(status == 400);
    post_decision(c, Json{{"task_id", 9}, {"decision", "skip"}}, status);
    CHECK(status == 404);

    auto bad = c.Post("/api/decisions", "{not json", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    const auto page = get_json(c, "/api/tasks");
    CHECK(page["total"] == 2);
    CHECK(get_json(c, "/api/tasks/2")["status"] == "decided");
    CHECK(get_json(c, "/api/progress")["decided"] == 1);

    const auto ex = get_json(c, "/api/export");
    CHECK(ex == estimate_to_json(r.session.merged()));
    CHECK(ex["entries"][1]["link"] == 2);
    CHECK(ex["rejections"] == 2);
}

TEST_CASE("concurrent links to one record commit once") {
    for (int round = 0; round < 5; ++round) {
        Running r;
        std::atomic<int> committed{0}, conflicts{0}, other{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < 8; ++w) {
            workers.emplace_back([&, w] {
                auto c = r.client();
                const int task = w % 2 == 0 ? 2 : 4;
                auto res = c.Post("/api/decisions", Json{{"task_id", task}, {"decision", "link"}, {"record", 3}}.dump(),
                                  "application/json");
                if (!res) return ++other, void();
                if (res->status == 201) ++committed;
                else if (res->status == 409) ++conflicts;
                else if (res->status != 200) ++other;
            });
        }
        for (auto& t : workers) t.join();
        CHECK(committed == 1);
        CHECK(other == 0);
        CHECK(conflicts >= 1);
        const auto snap = r.session.snapshot();
        CHECK(snap->log.size() == 1);
        CHECK_NOTHROW(r.session.merged());
    }
}

TEST_CASE("export matches a merge of the log") {
    const auto dir = std::filesystem::temp_directory_path() / "rlink_server_test";
    std::filesystem::create_directories(dir);
    const auto log = (dir / "decisions.jsonl").string();
    std::filesystem::remove(log);
    Json exported;
    {
        Running r(log);
        auto c = r.client();
        int status = 0;
        post_decision(c, Json{{"task_id", 2}, {"decision", "link"}, {"record", 2}}, status);
        post_decision(c, Json{{"task_id", 3}, {"decision", "non-link"}, {"note", "different people"}}, status);
        post_decision(c, Json{{"task_id", 4}, {"decision", "skip"}}, status);
        post_decision(c, Json{{"task_id", 2}, {"decision", "link"}, {"record", 3}, {"supersede", true}}, status);
        CHECK(status == 201);
        exported = get_json(c, "/api/export");
    }
    std::vector<ReviewDecision> decisions;
    std::istringstream in(read_text(log));
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) decisions.push_back(ReviewDecision::from_json(Json::parse(line)));
    }
    CHECK(decisions.size() == 4);
    const auto fx = review_fixture();
    CHECK(exported == estimate_to_json(merge_decisions(fx.est, decisions, &fx.post)));
    CHECK(exported["entries"][1]["link"] == 3);
    std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
