#include "attache/error.hpp"
#include "attache/service.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdio>
#include <functional>

#ifndef ATTACHE_VERSION
#define ATTACHE_VERSION "0.0.0"
#endif

namespace attache {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kMaxBins = 200;
constexpr std::size_t kMaxGridPoints = 4096;
constexpr std::size_t kDefaultBins = 10;
constexpr std::size_t kDefaultGridPoints = 128;

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::BadParameter, msg); }

const std::string* find(const QueryParams& p, std::string_view key) {
    auto it = p.find(key);
    return it == p.end() ? nullptr : &it->second;
}

const std::string& required(const QueryParams& p, std::string_view key) {
    const auto* v = find(p, key);
    if (!v || v->empty()) bad("missing query parameter '" + std::string(key) + "'");
    return *v;
}

MetricId metric_param(const QueryParams& p, std::string_view key) {
    const auto& text = required(p, key);
    auto m = metric_from_slug(text);
    if (!m) throw Error(ErrorCode::UnknownMetric, "unknown metric '" + text + "'");
    return *m;
}

YearFilter years_param(const QueryParams& p) {
    const auto* v = find(p, "years");
    return v ? YearFilter::parse(*v) : YearFilter::all();
}

std::size_t count_param(const QueryParams& p, std::string_view key, std::size_t fallback, std::size_t lo,
                        std::size_t hi) {
    const auto* v = find(p, key);
    if (!v) return fallback;
    std::size_t n = 0;
    auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), n);
    if (ec != std::errc{} || ptr != v->data() + v->size() || n < lo || n > hi) {
        bad("parameter '" + std::string(key) + "' must be an integer in [" + std::to_string(lo) + ", " +
            std::to_string(hi) + "]");
    }
    return n;
}

Selection selection_param(const QueryParams& p, const CommunityRegistry& registry) {
    const auto* level_text = find(p, "level");
    const auto level = level_text ? level_from_slug(*level_text) : SelectionLevel::All;
    if (!level) bad("level must be community, urbanicity, region or all");
    const auto years = years_param(p);
    switch (*level) {
        case SelectionLevel::Community: {
            const auto& id = required(p, "id");
            if (!registry.find(id)) throw Error(ErrorCode::UnknownCommunity, "unknown community '" + id + "'");
            return Selection::community(id, years);
        }
        case SelectionLevel::Urbanicity: return Selection::urbanicity(required(p, "id"), years);
        case SelectionLevel::Region: {
            const auto& id = required(p, "id");
            auto r = region_from_slug(id);
            if (!r) throw Error(ErrorCode::UnknownRegion, "unknown region '" + id + "'");
            return Selection::region(*r, years);
        }
        case SelectionLevel::All: break;
    }
    return Selection::everything(years);
}

Json selection_json(const Selection& sel) {
    Json j;
    j["level"] = slug(sel.level());
    std::visit(
        [&](const auto& scope) {
            using T = std::decay_t<decltype(scope)>;
            if constexpr (std::is_same_v<T, CommunityScope>) j["id"] = scope.id;
            else if constexpr (std::is_same_v<T, UrbanicityScope>) j["id"] = scope.label;
            else if constexpr (std::is_same_v<T, RegionScope>) j["id"] = slug(scope.region);
            else j["id"] = nullptr;
        },
        sel.scope);
    j["years"] = sel.years.to_string();
    return j;
}

Json number_or_null(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }
Json display_or_null(const std::optional<double>& v) { return v ? Json(display2(*v)) : Json(nullptr); }

Json cell_json(const std::optional<SummaryCell>& cell) {
    if (!cell) return nullptr;
    return Json{{"mean", cell->mean}, {"mean_display", display2(cell->mean)}, {"n", cell->n},
                {"n_missing", cell->n_missing}};
}

Json profile_json(const std::vector<CorrelationEntry>& entries) {
    Json arr = Json::array();
    for (const auto& e : entries) {
        arr.push_back({{"metric", slug(e.metric)}, {"r", number_or_null(e.r)}, {"r_display", display_or_null(e.r)},
                       {"n_pairs", e.n_pairs}});
    }
    return arr;
}

// ---------------------------------------------------------------------------

Json communities_route(const AnalyticsSnapshot& snap, const QueryParams&) {
    const auto& registry = snap.registry();
    Json list = Json::array();
    for (const auto& c : registry.communities()) {
        list.push_back({{"id", c.id},
                        {"display_name", c.display_name},
                        {"region", slug(c.region)},
                        {"region_name", display_name(c.region)},
                        {"urbanicity", c.urbanicity},
                        {"lat", c.latitude},
                        {"lon", c.longitude},
                        {"inferred", c.inferred}});
    }
    Json regions = Json::array();
    for (auto r : kAllRegions) regions.push_back({{"id", slug(r)}, {"name", display_name(r)}});
    Json metrics = Json::array();
    for (auto m : kAllMetrics) {
        const auto& def = metric_definition(m);
        metrics.push_back({{"id", slug(m)}, {"name", display_name(m)}, {"scale_min", def.scale.min},
                           {"scale_max", def.scale.max}});
    }
    return {{"communities", list},
            {"regions", regions},
            {"urbanicity_labels", registry.urbanicity_labels()},
            {"metrics", metrics}};
}

Json map_route(const AnalyticsSnapshot& snap, const QueryParams& p) {
    const auto metric = metric_param(p, "metric");
    const auto years = years_param(p);
    Json list = Json::array();
    for (const auto& rec : map_summary(snap, metric, years)) {
        list.push_back({{"id", rec.id},
                        {"display_name", rec.display_name},
                        {"lat", rec.latitude},
                        {"lon", rec.longitude},
                        {"n", rec.n},
                        {"summary", cell_json(rec.cell)}});
    }
    return {{"metric", slug(metric)}, {"years", years.to_string()}, {"communities", list}};
}

Json bars_route(const AnalyticsSnapshot& snap, const QueryParams& p) {
    const auto& community = required(p, "community");
    const auto metric = metric_param(p, "metric");
    const auto years = years_param(p);
    Json list = Json::array();
    for (const auto& bar : bar_chart_data(snap, metric, years, community)) {
        list.push_back({{"level", slug(bar.level)},
                        {"key", bar.key},
                        {"label", bar.label},
                        {"respondents", bar.respondents},
                        {"summary", cell_json(bar.cell)},
                        {"community_averaged_mean", number_or_null(bar.community_averaged_mean)}});
    }
    return {{"metric", slug(metric)}, {"years", years.to_string()}, {"community", community}, {"bars", list}};
}

Json dotplot_route(const AnalyticsSnapshot& snap, const QueryParams& p) {
    const auto metric = metric_param(p, "metric");
    const auto years = years_param(p);
    const auto means = community_means(snap, metric, years);
    Json list = Json::array();
    std::size_t rank = 0;
    for (const auto& e : means.ranked) {
        list.push_back({{"rank", ++rank},
                        {"id", e.id},
                        {"display_name", e.display_name},
                        {"region", slug(e.region)},
                        {"urbanicity", e.urbanicity},
                        {"summary", cell_json(e.cell)}});
    }
    return {{"metric", slug(metric)}, {"years", years.to_string()}, {"entries", list},
            {"without_data", means.without_data}};
}

Json correlations_route(const AnalyticsSnapshot& snap, const QueryParams& p) {
    const auto sel = selection_param(p, snap.registry());
    return {{"target", slug(kAttachment)},
            {"selection", selection_json(sel)},
            {"entries", profile_json(correlation_profile(snap, sel))},
            {"reference", profile_json(reference_profile(snap, sel.years))}};
}

Json bin2d_route(const AnalyticsSnapshot& snap, const QueryParams& p) {
    const auto x = metric_param(p, "x");
    const auto y = metric_param(p, "y");
    const auto sel = selection_param(p, snap.registry());
    const auto nx = count_param(p, "nx", kDefaultBins, 1, kMaxBins);
    const auto ny = count_param(p, "ny", kDefaultBins, 1, kMaxBins);
    const auto h = bin2d(snap, x, y, sel, nx, ny);
    return {{"x", slug(x)},         {"y", slug(y)},           {"selection", selection_json(sel)},
            {"x_edges", h.x_edges}, {"y_edges", h.y_edges},   {"counts", h.counts},
            {"total", h.total}};
}

Json series_route(const AnalyticsSnapshot& snap, const QueryParams& p) {
    const auto metric = metric_param(p, "metric");
    if (const auto* y = find(p, "years"); y && *y != "each") bad("series only supports years=each");
    std::vector<std::string> ids;
    const auto& list = required(p, "communities");
    std::size_t start = 0;
    while (start <= list.size()) {
        const auto comma = list.find(',', start);
        const auto end = comma == std::string::npos ? list.size() : comma;
        if (end > start) ids.push_back(list.substr(start, end - start));
        start = end + 1;
    }
    Json out = Json::array();
    for (const auto& s : yearly_series(snap, metric, ids)) {
        Json years = Json::array();
        for (const auto& [year, cell] : s.by_year) years.push_back({{"year", year}, {"summary", cell_json(cell)}});
        out.push_back({{"id", s.id}, {"display_name", s.display_name}, {"years", years},
                       {"aggregate", cell_json(s.aggregate)}});
    }
    return {{"metric", slug(metric)}, {"series", out}};
}

Json parallel_route(const AnalyticsSnapshot& snap, const QueryParams& p) {
    const auto years = years_param(p);
    const auto pc = parallel_coordinates(snap, years);
    Json axes = Json::array();
    for (std::size_t i = 0; i < pc.axes.size(); ++i) {
        axes.push_back({{"metric", slug(pc.axes[i])}, {"overall_mean", number_or_null(pc.overall_means[i])}});
    }
    Json lines = Json::array();
    for (const auto& line : pc.lines) {
        Json values = Json::array();
        for (const auto& v : line.values) values.push_back(number_or_null(v));
        lines.push_back({{"id", line.id}, {"display_name", line.display_name}, {"values", values}});
    }
    return {{"years", years.to_string()}, {"axes", axes}, {"lines", lines}};
}

Json density_route(const AnalyticsSnapshot& snap, const QueryParams& p) {
    const auto metric = metric_param(p, "metric");
    const auto sel = selection_param(p, snap.registry());
    const auto points = count_param(p, "points", kDefaultGridPoints, kMinDensityGridPoints, kMaxGridPoints);
    const auto est = density_estimate(snap, metric, sel, points);
    return {{"metric", slug(metric)}, {"selection", selection_json(sel)}, {"bandwidth", est.bandwidth},
            {"n", est.n},           {"grid", est.grid},                 {"density", est.density}};
}

Json health_route(const AnalyticsSnapshot& snap, const QueryParams&) {
    const auto& prov = snap.provenance();
    return {{"status", "ok"},
            {"rows", snap.total_respondents()},
            {"accepted", prov.accepted},
            {"rejected", prov.rejected},
            {"source_sha256", prov.source_sha256},
            {"build", {{"version", version()}, {"compiler", __VERSION__}, {"cxx_standard", __cplusplus}}}};
}

using Handler = Json (*)(const AnalyticsSnapshot&, const QueryParams&);

const std::map<std::string, Handler, std::less<>>& route_table() {
    static const std::map<std::string, Handler, std::less<>> table = {
        {"/api/communities", communities_route}, {"/api/map", map_route},
        {"/api/bars", bars_route},               {"/api/dotplot", dotplot_route},
        {"/api/correlations", correlations_route}, {"/api/bin2d", bin2d_route},
        {"/api/series", series_route},           {"/api/parallel", parallel_route},
        {"/api/density", density_route},         {"/api/health", health_route},
    };
    return table;
}

ApiResponse error_response(int status, std::string_view code, const std::string& message) {
    Json body = {{"error", {{"code", code}, {"message", message}}}};
    return {status, body.dump()};
}

}  // namespace

std::string display2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string_view version() noexcept { return ATTACHE_VERSION; }

SnapshotStore::SnapshotStore(std::shared_ptr<const AnalyticsSnapshot> snapshot) : snapshot_(std::move(snapshot)) {}

std::shared_ptr<const AnalyticsSnapshot> SnapshotStore::current() const {
    std::lock_guard lock(mutex_);
    return snapshot_;
}

void SnapshotStore::replace(std::shared_ptr<const AnalyticsSnapshot> snapshot) {
    std::lock_guard lock(mutex_);
    snapshot_ = std::move(snapshot);
}

int http_status(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownCommunity:
        case ErrorCode::UnknownUrbanicity:
        case ErrorCode::UnknownRegion:
        case ErrorCode::UnknownMetric:
        case ErrorCode::BadParameter: return 400;
        case ErrorCode::EmptySelection:
        case ErrorCode::NoData:
        case ErrorCode::DegenerateSample: return 422;
        default: return 500;
    }
}

Api::Api(std::shared_ptr<const SnapshotStore> store) : store_(std::move(store)) {}

const std::vector<std::string>& Api::routes() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [path, handler] : route_table()) out.push_back(path);
        return out;
    }();
    return names;
}

ApiResponse Api::get(std::string_view path, const QueryParams& params) const {
    const auto& table = route_table();
    auto it = table.find(path);
    if (it == table.end()) return error_response(404, "not_found", "no route " + std::string(path));
    try {
        const auto snap = store_->current();
        return {200, it->second(*snap, params).dump()};
    } catch (const Error& e) {
        return error_response(http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        return error_response(500, "internal_error", e.what());
    }
}

}  // namespace attache
