#include "attache/error.hpp"
#include "attache/service.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>

namespace attache {

struct Server::Impl {
    std::shared_ptr<SnapshotStore> store;
    ServerOptions options;
    Api api;
    httplib::Server http;
    std::atomic<bool> bound{false};

    Impl(std::shared_ptr<SnapshotStore> s, ServerOptions o)
        : store(std::move(s)), options(std::move(o)), api(store) {}

    void cors(const httplib::Request& req, httplib::Response& res) const {
        if (options.cors_origins.empty()) {
            res.set_header("Access-Control-Allow-Origin", "*");
        } else {
            const auto origin = req.get_header_value("Origin");
            const auto& allowed = options.cors_origins;
            if (!origin.empty() && std::find(allowed.begin(), allowed.end(), origin) != allowed.end()) {
                res.set_header("Access-Control-Allow-Origin", origin);
                res.set_header("Vary", "Origin");
            }
        }
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    }

    void install_routes() {
        http.new_task_queue = [threads = options.threads] {
            return new httplib::ThreadPool(std::max<std::size_t>(threads, 1));
        };

        http.set_tcp_nodelay(true);

        http.Get(R"(/api/.*)", [this](const httplib::Request& req, httplib::Response& res) {
            QueryParams params;
            for (const auto& [key, value] : req.params) params.emplace(key, value);
            const auto out = api.get(req.path, params);
            res.status = out.status;
            res.set_content(out.body, "application/json");
            cors(req, res);
        });

        if (options.reload) {
            http.Post("/api/admin/reload", [this](const httplib::Request& req, httplib::Response& res) {
                try {
                    auto fresh = options.reload();
                    const auto rows = fresh->total_respondents();
                    store->replace(std::move(fresh));
                    spdlog::info("snapshot reloaded: {} respondents", rows);
                    res.set_content(R"({"status":"reloaded","rows":)" + std::to_string(rows) + "}",
                                    "application/json");
                } catch (const std::exception& e) {
                    spdlog::error("reload failed: {}", e.what());
                    res.status = 500;
                    res.set_content(R"({"error":{"code":"reload_failed","message":"see server log"}})",
                                    "application/json");
                }
                cors(req, res);
            });
        }

        http.Options(R"(/api/.*)", [this](const httplib::Request& req, httplib::Response& res) {
            res.status = 204;
            cors(req, res);
        });

        if (options.assets) {
            if (!http.set_mount_point("/", options.assets->string())) {
                throw Error(ErrorCode::Io, "cannot serve assets from " + options.assets->string());
            }
        }

        http.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
            if (res.status == 404 && req.path.rfind("/api/", 0) != 0) {
                const nlohmann::json body = {{"error", {{"code", "not_found"}, {"message", "no route " + req.path}}}};
                res.set_content(body.dump(), "application/json");
            }
            cors(req, res);
        });

        http.set_logger([](const httplib::Request& req, const httplib::Response& res) {
            spdlog::debug("{} {} -> {}", req.method, req.path, res.status);
        });
    }
};

Server::Server(std::shared_ptr<SnapshotStore> store, ServerOptions options)
    : impl_(std::make_unique<Impl>(std::move(store), std::move(options))) {
    impl_->install_routes();
}

Server::~Server() { stop(); }

int Server::bind() {
    const auto& o = impl_->options;
    int port = o.port;
    if (port == 0) {
        port = impl_->http.bind_to_any_port(o.host);
        if (port < 0) throw Error(ErrorCode::Io, "cannot bind " + o.host);
    } else if (!impl_->http.bind_to_port(o.host, port)) {
        throw Error(ErrorCode::Io, "cannot bind " + o.host + ":" + std::to_string(port));
    }
    impl_->bound = true;
    return port;
}

void Server::listen() {
    if (!impl_->bound) throw Error(ErrorCode::Io, "server is not bound");
    impl_->http.listen_after_bind();
}

void Server::stop() {
    if (impl_) impl_->http.stop();
}

bool Server::running() const { return impl_->http.is_running(); }

}  // namespace attache
