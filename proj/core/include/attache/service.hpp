#pragma once

#include "attache/analytics.hpp"
#include "attache/error.hpp"
#include "attache/snapshot.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace attache {

/// Holds the live snapshot. Readers take a shared_ptr copy, so a replace()
/// never disturbs requests already running against the old snapshot.
class SnapshotStore {
public:
    explicit SnapshotStore(std::shared_ptr<const AnalyticsSnapshot> snapshot);

    std::shared_ptr<const AnalyticsSnapshot> current() const;
    void replace(std::shared_ptr<const AnalyticsSnapshot> snapshot);

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const AnalyticsSnapshot> snapshot_;
};

using QueryParams = std::map<std::string, std::string, std::less<>>;

struct ApiResponse {
    int status = 200;
    std::string body;
};

/// HTTP status for an analytics error code: 400 for parameter errors, 422 for
/// selections without usable data, 500 otherwise.
int http_status(ErrorCode code) noexcept;

/// Transport-independent JSON query engine behind the HTTP server.
class Api {
public:
    explicit Api(std::shared_ptr<const SnapshotStore> store);

    /// Dispatches a GET on `path` (e.g. "/api/map"). Never throws.
    ApiResponse get(std::string_view path, const QueryParams& params) const;

    static const std::vector<std::string>& routes();

private:
    std::shared_ptr<const SnapshotStore> store_;
};

std::string_view version() noexcept;

// ---------------------------------------------------------------------------

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8787;
    std::optional<std::filesystem::path> assets;
    /// Empty: any origin is allowed.
    std::vector<std::string> cors_origins;
    std::size_t threads = 8;
    /// Rebuilds the snapshot for POST /api/admin/reload; route absent when unset.
    std::function<std::shared_ptr<const AnalyticsSnapshot>()> reload;
};

class Server {
public:
    Server(std::shared_ptr<SnapshotStore> store, ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Binds the listening socket; port 0 picks a free port. Returns the bound port.
    /// Throws Error(Io) on failure.
    int bind();
    /// Serves until stop(). bind() must have succeeded.
    void listen();
    void stop();
    bool running() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------

enum class ReportKind { OpennessTop5, RustBeltEconomy, SafetyRanks, CorrelationArgmax };

std::optional<ReportKind> report_from_slug(std::string_view s) noexcept;
std::string_view slug(ReportKind kind) noexcept;

struct ReportSummary {
    std::size_t rows = 0;
    std::string note;
};

/// Writes the report as comma-separated text with 2-decimal display values.
ReportSummary write_report(const AnalyticsSnapshot& snap, ReportKind kind, std::ostream& out);

/// Fixed 2-decimal rendering used for every display field.
std::string display2(double v);

}  // namespace attache
