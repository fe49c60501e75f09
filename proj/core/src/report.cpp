#include "attache/csv.hpp"
#include "attache/error.hpp"
#include "attache/service.hpp"

#include <algorithm>
#include <map>
#include <ostream>

namespace attache {

namespace {

constexpr std::array<std::pair<ReportKind, std::string_view>, 4> kReports = {{
    {ReportKind::OpennessTop5, "openness_top5"},
    {ReportKind::RustBeltEconomy, "rustbelt_economy"},
    {ReportKind::SafetyRanks, "safety_ranks"},
    {ReportKind::CorrelationArgmax, "correlation_argmax"},
}};

void row(std::ostream& out, std::initializer_list<std::string> fields) {
    bool first = true;
    for (const auto& f : fields) {
        if (!first) out << ',';
        out << csv::escape(f);
        first = false;
    }
    out << '\n';
}

ReportSummary openness_top5(const AnalyticsSnapshot& snap, std::ostream& out) {
    row(out, {"community", "region", "urbanicity", "openness"});
    const auto top = top_k(snap, MetricId::Openness, YearFilter::all(), 5);
    for (const auto& e : top) {
        row(out, {e.display_name, std::string(display_name(e.region)), e.urbanicity, display2(e.cell.mean)});
    }
    return {top.size(), "top " + std::to_string(top.size()) + " communities by openness, all years"};
}

ReportSummary rustbelt_economy(const AnalyticsSnapshot& snap, std::ostream& out) {
    row(out, {"community", "2008", "2009", "2010"});
    const auto members = resolve_selection(Selection::region(RegionId::RustBelt), snap.registry());
    if (members.empty()) return {0, "registry has no rust_belt communities"};
    const auto series = yearly_series(snap, MetricId::Economy, members);
    for (const auto& s : series) {
        auto year = [&](int y) {
            auto it = s.by_year.find(y);
            return it == s.by_year.end() ? std::string("NA") : display2(it->second.mean);
        };
        row(out, {s.display_name, year(2008), year(2009), year(2010)});
    }
    return {series.size(), "economy by year, sorted by the all-years mean"};
}

ReportSummary safety_ranks(const AnalyticsSnapshot& snap, std::ostream& out) {
    row(out, {"year", "community", "region", "safety", "rank_from_best", "rank_from_worst", "ranked"});
    std::size_t rows = 0;
    for (int year : kSurveyYears) {
        const auto ranked = community_means(snap, MetricId::Safety, YearFilter::single(year)).ranked;
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            const auto& e = ranked[i];
            row(out, {std::to_string(year), e.display_name, std::string(display_name(e.region)), display2(e.cell.mean),
                      std::to_string(i + 1), std::to_string(ranked.size() - i), std::to_string(ranked.size())});
            ++rows;
        }
    }
    return {rows, "safety ranks per survey year"};
}

ReportSummary correlation_argmax(const AnalyticsSnapshot& snap, std::ostream& out) {
    row(out, {"community", "region", "top_metric", "r", "n_pairs"});
    const auto& registry = snap.registry();
    std::map<MetricId, std::size_t> wins;
    std::size_t rows = 0;
    for (const auto& c : registry.communities()) {
        const auto profile = correlation_profile(snap, Selection::community(c.id));
        const CorrelationEntry* best = nullptr;
        for (const auto& e : profile) {
            if (e.r && (!best || *e.r > *best->r)) best = &e;
        }
        if (!best) {
            row(out, {c.display_name, std::string(display_name(c.region)), "NA", "NA", "0"});
        } else {
            ++wins[best->metric];
            row(out, {c.display_name, std::string(display_name(c.region)), std::string(slug(best->metric)),
                      display2(*best->r), std::to_string(best->n_pairs)});
        }
        ++rows;
    }
    std::string note = "strongest correlate of community_attachment:";
    for (const auto& [metric, count] : wins) {
        note += " " + std::string(slug(metric)) + "=" + std::to_string(count);
    }
    note += " (of " + std::to_string(registry.size()) + " communities)";
    return {rows, note};
}

}  // namespace

std::optional<ReportKind> report_from_slug(std::string_view s) noexcept {
    for (const auto& [kind, name] : kReports) {
        if (name == s) return kind;
    }
    return std::nullopt;
}

std::string_view slug(ReportKind kind) noexcept {
    for (const auto& [k, name] : kReports) {
        if (k == kind) return name;
    }
    return "";
}

ReportSummary write_report(const AnalyticsSnapshot& snap, ReportKind kind, std::ostream& out) {
    switch (kind) {
        case ReportKind::OpennessTop5: return openness_top5(snap, out);
        case ReportKind::RustBeltEconomy: return rustbelt_economy(snap, out);
        case ReportKind::SafetyRanks: return safety_ranks(snap, out);
        case ReportKind::CorrelationArgmax: return correlation_argmax(snap, out);
    }
    throw Error(ErrorCode::BadParameter, "unknown report kind");
}

}  // namespace attache
