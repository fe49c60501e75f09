#include "attache/analytics.hpp"

#include "attache/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace attache {

namespace {

struct Accumulator {
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t missing = 0;

    std::optional<SummaryCell> cell() const {
        if (n == 0) return std::nullopt;
        return SummaryCell{sum / static_cast<double>(n), n, missing};
    }
};

template <typename Fn>
void for_each_block(const AnalyticsSnapshot& snap, std::span<const std::size_t> communities, YearFilter years,
                    Fn&& fn) {
    for (auto c : communities) {
        for (int year : kSurveyYears) {
            if (years.matches(year)) fn(snap.block(c, year));
        }
    }
}

Accumulator accumulate(const AnalyticsSnapshot& snap, MetricId metric, std::span<const std::size_t> communities,
                       YearFilter years) {
    Accumulator acc;
    for_each_block(snap, communities, years, [&](const ResponseBlock& b) {
        const auto& values = b.column(metric);
        const auto& mask = b.mask(metric);
        for (std::size_t r = 0; r < b.rows; ++r) {
            if (mask[r]) {
                acc.sum += values[r];
                ++acc.n;
            } else {
                ++acc.missing;
            }
        }
    });
    return acc;
}

Accumulator accumulate_one(const AnalyticsSnapshot& snap, MetricId metric, std::size_t community, YearFilter years) {
    const std::size_t one[] = {community};
    return accumulate(snap, metric, one, years);
}

std::optional<double> mean_of(const std::optional<SummaryCell>& cell) {
    if (!cell) return std::nullopt;
    return cell->mean;
}

std::size_t require_community(const CommunityRegistry& registry, std::string_view id) {
    auto i = registry.index_of(id);
    if (!i) throw Error(ErrorCode::UnknownCommunity, "unknown community '" + std::string(id) + "'");
    return *i;
}

std::string describe(const Selection& sel) {
    std::string s(slug(sel.level()));
    std::visit(
        [&](const auto& scope) {
            using T = std::decay_t<decltype(scope)>;
            if constexpr (std::is_same_v<T, CommunityScope>) s += " " + scope.id;
            if constexpr (std::is_same_v<T, UrbanicityScope>) s += " '" + scope.label + "'";
            if constexpr (std::is_same_v<T, RegionScope>) s += " " + std::string(slug(scope.region));
        },
        sel.scope);
    return s + ", years " + sel.years.to_string();
}

}  // namespace

SummaryCell mean_metric(const AnalyticsSnapshot& snap, MetricId metric, const Selection& sel) {
    const auto communities = resolve_indices(sel, snap.registry());
    auto cell = accumulate(snap, metric, communities, sel.years).cell();
    if (!cell) {
        throw Error(ErrorCode::EmptySelection,
                    "no " + std::string(slug(metric)) + " values for selection " + describe(sel));
    }
    return *cell;
}

// ---------------------------------------------------------------------------

CommunityMeans community_means(const AnalyticsSnapshot& snap, MetricId metric, YearFilter years) {
    const auto& registry = snap.registry();
    CommunityMeans out;
    for (std::size_t c = 0; c < registry.size(); ++c) {
        const auto& community = registry[c];
        if (auto cell = accumulate_one(snap, metric, c, years).cell()) {
            out.ranked.push_back({c, community.id, community.display_name, community.region,
                                  community.urbanicity, *cell});
        } else {
            out.without_data.push_back(community.id);
        }
    }
    std::sort(out.ranked.begin(), out.ranked.end(), [](const RankedCommunity& a, const RankedCommunity& b) {
        if (a.cell.mean != b.cell.mean) return a.cell.mean > b.cell.mean;
        if (a.display_name != b.display_name) return a.display_name < b.display_name;
        return a.id < b.id;
    });
    return out;
}

std::vector<RankedCommunity> top_k(const AnalyticsSnapshot& snap, MetricId metric, YearFilter years,
                                   std::size_t k) {
    auto ranked = community_means(snap, metric, years).ranked;
    if (k < ranked.size()) ranked.resize(k);
    return ranked;
}

RankInfo rank_community(const AnalyticsSnapshot& snap, MetricId metric, YearFilter years,
                        std::string_view community) {
    require_community(snap.registry(), community);
    const auto ranked = community_means(snap, metric, years).ranked;
    auto it = std::find_if(ranked.begin(), ranked.end(), [&](const auto& e) { return e.id == community; });
    if (it == ranked.end()) {
        throw Error(ErrorCode::NoData, "community '" + std::string(community) + "' has no " +
                                           std::string(slug(metric)) + " values for years " + years.to_string());
    }
    const auto pos = static_cast<std::size_t>(it - ranked.begin());
    return {pos + 1, ranked.size() - pos, ranked.size()};
}

// ---------------------------------------------------------------------------

std::array<Bar, 4> bar_chart_data(const AnalyticsSnapshot& snap, MetricId metric, YearFilter years,
                                  std::string_view community) {
    const auto& registry = snap.registry();
    const auto& c = registry[require_community(registry, community)];
    const std::array<Selection, 4> selections = {
        Selection::community(c.id, years),
        Selection::urbanicity(c.urbanicity, years),
        Selection::region(c.region, years),
        Selection::everything(years),
    };
    const std::array<std::string, 4> keys = {c.id, c.urbanicity, std::string(slug(c.region)), "all"};
    const std::array<std::string, 4> labels = {c.display_name, c.urbanicity, std::string(display_name(c.region)),
                                               "All communities"};

    std::array<Bar, 4> bars;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto members = resolve_indices(selections[i], registry);
        const auto acc = accumulate(snap, metric, members, years);
        auto& bar = bars[i];
        bar.level = selections[i].level();
        bar.key = keys[i];
        bar.label = labels[i];
        bar.respondents = acc.n + acc.missing;
        bar.cell = acc.cell();

        double sum_of_means = 0.0;
        std::size_t with_data = 0;
        for (auto m : members) {
            if (auto cell = accumulate_one(snap, metric, m, years).cell()) {
                sum_of_means += cell->mean;
                ++with_data;
            }
        }
        if (with_data > 0) bar.community_averaged_mean = sum_of_means / static_cast<double>(with_data);
    }
    return bars;
}

// ---------------------------------------------------------------------------

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = std::min(x.size(), y.size());
    if (n < 2) return std::nullopt;
    const bool x_constant = std::all_of(x.begin(), x.begin() + n, [&](double v) { return v == x[0]; });
    const bool y_constant = std::all_of(y.begin(), y.begin() + n, [&](double v) { return v == y[0]; });
    if (x_constant || y_constant) return std::nullopt;

    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<CorrelationEntry> correlation_profile(const AnalyticsSnapshot& snap, const Selection& sel) {
    const auto communities = resolve_indices(sel, snap.registry());
    std::vector<CorrelationEntry> out;
    out.reserve(kMetricCount - 1);
    std::vector<double> xs, ys;
    for (auto metric : kAllMetrics) {
        if (metric == kAttachment) continue;
        xs.clear();
        ys.clear();
        for_each_block(snap, communities, sel.years, [&](const ResponseBlock& b) {
            const auto& xv = b.column(metric);
            const auto& xm = b.mask(metric);
            const auto& yv = b.column(kAttachment);
            const auto& ym = b.mask(kAttachment);
            for (std::size_t r = 0; r < b.rows; ++r) {
                if (xm[r] && ym[r]) {
                    xs.push_back(xv[r]);
                    ys.push_back(yv[r]);
                }
            }
        });
        out.push_back({metric, pearson(xs, ys), xs.size()});
    }
    return out;
}

std::vector<CorrelationEntry> reference_profile(const AnalyticsSnapshot& snap, YearFilter years) {
    return correlation_profile(snap, Selection::everything(years));
}

// ---------------------------------------------------------------------------

std::vector<MapRecord> map_summary(const AnalyticsSnapshot& snap, MetricId metric, YearFilter years) {
    const auto& registry = snap.registry();
    std::vector<MapRecord> out;
    out.reserve(registry.size());
    for (std::size_t c = 0; c < registry.size(); ++c) {
        const auto& community = registry[c];
        const auto acc = accumulate_one(snap, metric, c, years);
        out.push_back({c, community.id, community.display_name, community.latitude, community.longitude,
                       acc.n + acc.missing, acc.cell()});
    }
    return out;
}

// ---------------------------------------------------------------------------

std::vector<double> bin_edges(const Scale& scale, std::size_t bins) {
    std::vector<double> edges(bins + 1);
    const double width = scale.max - scale.min;
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = scale.min + width * static_cast<double>(i) / static_cast<double>(bins);
    }
    edges.back() = scale.max;
    return edges;
}

std::size_t bin_index(std::span<const double> edges, double v) noexcept {
    const std::size_t bins = edges.size() - 1;
    const auto it = std::upper_bound(edges.begin(), edges.end(), v);
    if (it == edges.begin()) return 0;
    return std::min(static_cast<std::size_t>(it - edges.begin()) - 1, bins - 1);
}

Histogram2d bin2d(const AnalyticsSnapshot& snap, MetricId x, MetricId y, const Selection& sel, std::size_t nx,
                  std::size_t ny) {
    if (nx == 0 || ny == 0) throw Error(ErrorCode::BadParameter, "bin counts must be at least 1");
    const auto communities = resolve_indices(sel, snap.registry());

    Histogram2d h;
    h.x_metric = x;
    h.y_metric = y;
    h.x_edges = bin_edges(metric_definition(x).scale, nx);
    h.y_edges = bin_edges(metric_definition(y).scale, ny);
    h.counts.assign(nx, std::vector<std::size_t>(ny, 0));
    for_each_block(snap, communities, sel.years, [&](const ResponseBlock& b) {
        const auto& xv = b.column(x);
        const auto& xm = b.mask(x);
        const auto& yv = b.column(y);
        const auto& ym = b.mask(y);
        for (std::size_t r = 0; r < b.rows; ++r) {
            if (!xm[r] || !ym[r]) continue;
            ++h.counts[bin_index(h.x_edges, xv[r])][bin_index(h.y_edges, yv[r])];
            ++h.total;
        }
    });
    if (h.total == 0) {
        throw Error(ErrorCode::EmptySelection, "no respondent has both " + std::string(slug(x)) + " and " +
                                                   std::string(slug(y)) + " for selection " + describe(sel));
    }
    return h;
}

// ---------------------------------------------------------------------------

std::vector<YearlySeries> yearly_series(const AnalyticsSnapshot& snap, MetricId metric,
                                        std::span<const std::string> communities) {
    if (communities.empty()) throw Error(ErrorCode::BadParameter, "series needs at least one community");
    const auto& registry = snap.registry();
    std::vector<YearlySeries> out;
    for (const auto& id : communities) {
        const auto c = require_community(registry, id);
        YearlySeries s{c, registry[c].id, registry[c].display_name, {}, std::nullopt};
        for (int year : kSurveyYears) {
            if (auto cell = accumulate_one(snap, metric, c, YearFilter::single(year)).cell()) {
                s.by_year.emplace(year, *cell);
            }
        }
        s.aggregate = accumulate_one(snap, metric, c, YearFilter::all()).cell();
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const YearlySeries& a, const YearlySeries& b) {
        if (a.aggregate.has_value() != b.aggregate.has_value()) return a.aggregate.has_value();
        if (a.aggregate && a.aggregate->mean != b.aggregate->mean) return a.aggregate->mean < b.aggregate->mean;
        if (a.display_name != b.display_name) return a.display_name < b.display_name;
        return a.id < b.id;
    });
    return out;
}

// ---------------------------------------------------------------------------

ParallelCoordinates parallel_coordinates(const AnalyticsSnapshot& snap, YearFilter years) {
    const auto& registry = snap.registry();
    const auto everyone = resolve_indices(Selection::everything(years), registry);

    std::array<std::optional<double>, kMetricCount> overall;
    for (auto m : kAllMetrics) overall[index_of(m)] = mean_of(accumulate(snap, m, everyone, years).cell());

    std::vector<MetricId> sorted;
    for (auto m : kAllMetrics) {
        if (m != kAttachment) sorted.push_back(m);
    }
    std::stable_sort(sorted.begin(), sorted.end(), [&](MetricId a, MetricId b) {
        const auto& ma = overall[index_of(a)];
        const auto& mb = overall[index_of(b)];
        if (ma.has_value() != mb.has_value()) return ma.has_value();
        return ma && *ma > *mb;
    });

    ParallelCoordinates pc;
    pc.axes.push_back(kAttachment);
    pc.axes.insert(pc.axes.end(), sorted.begin(), sorted.end());
    for (auto m : pc.axes) pc.overall_means.push_back(overall[index_of(m)]);
    for (std::size_t c = 0; c < registry.size(); ++c) {
        Polyline line{c, registry[c].id, registry[c].display_name, {}};
        for (auto m : pc.axes) {
            line.values.push_back(mean_of(accumulate_one(snap, m, c, years).cell()));
        }
        pc.lines.push_back(std::move(line));
    }
    return pc;
}

// ---------------------------------------------------------------------------

double silverman_bandwidth(std::span<const double> samples) {
    const std::size_t n = samples.size();
    if (n < 2) throw Error(ErrorCode::DegenerateSample, "bandwidth needs at least two samples");
    double sum = 0.0;
    for (double v : samples) sum += v;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw Error(ErrorCode::DegenerateSample, "samples have zero variance");
    return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

std::vector<double> kde_evaluate(std::span<const double> samples, double bandwidth,
                                 std::span<const double> points) {
    if (samples.empty() || !(bandwidth > 0.0)) {
        throw Error(ErrorCode::DegenerateSample, "density needs samples and a positive bandwidth");
    }
    // Survey-derived values repeat heavily; weight each distinct value by its multiplicity.
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::pair<double, double>> atoms;
    for (double v : sorted) {
        if (!atoms.empty() && atoms.back().first == v) {
            atoms.back().second += 1.0;
        } else {
            atoms.emplace_back(v, 1.0);
        }
    }
    const double norm = 1.0 / (static_cast<double>(samples.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    std::vector<double> out;
    out.reserve(points.size());
    for (double x : points) {
        double acc = 0.0;
        for (const auto& [v, w] : atoms) {
            const double z = (x - v) / bandwidth;
            acc += w * std::exp(-0.5 * z * z);
        }
        out.push_back(acc * norm);
    }
    return out;
}

std::vector<double> collect_values(const AnalyticsSnapshot& snap, MetricId metric, const Selection& sel) {
    const auto communities = resolve_indices(sel, snap.registry());
    std::vector<double> out;
    for_each_block(snap, communities, sel.years, [&](const ResponseBlock& b) {
        const auto& values = b.column(metric);
        const auto& mask = b.mask(metric);
        for (std::size_t r = 0; r < b.rows; ++r) {
            if (mask[r]) out.push_back(values[r]);
        }
    });
    return out;
}

DensityEstimate density_estimate(const AnalyticsSnapshot& snap, MetricId metric, const Selection& sel,
                                 std::size_t grid_points) {
    if (grid_points < kMinDensityGridPoints) {
        throw Error(ErrorCode::BadParameter,
                    "density needs at least " + std::to_string(kMinDensityGridPoints) + " grid points");
    }
    const auto values = collect_values(snap, metric, sel);
    if (values.size() < 2) {
        throw Error(ErrorCode::DegenerateSample, "density needs at least two " + std::string(slug(metric)) +
                                                     " values for selection " + describe(sel));
    }
    if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); })) {
        throw Error(ErrorCode::DegenerateSample, "all " + std::string(slug(metric)) + " values are equal");
    }

    DensityEstimate est;
    est.n = values.size();
    est.bandwidth = silverman_bandwidth(values);
    est.grid = bin_edges(metric_definition(metric).scale, grid_points - 1);
    est.density = kde_evaluate(values, est.bandwidth, est.grid);
    return est;
}

}  // namespace attache
