#pragma once

#include "attache/domain.hpp"
#include "attache/snapshot.hpp"

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace attache {

/// Mean of one metric under one selection.
/// `n` respondents had the metric present, `n_missing` did not.
struct SummaryCell {
    double mean = 0.0;
    std::size_t n = 0;
    std::size_t n_missing = 0;
};

/// Throws EmptySelection when no respondent in the selection has the metric.
SummaryCell mean_metric(const AnalyticsSnapshot& snap, MetricId metric, const Selection& sel);

// ---------------------------------------------------------------------------
// Rankings

struct RankedCommunity {
    std::size_t community = 0;  // registry index
    std::string id;
    std::string display_name;
    RegionId region = RegionId::GreatPlains;
    std::string urbanicity;
    SummaryCell cell;
};

struct CommunityMeans {
    /// Descending by mean, ties ascending by display name.
    std::vector<RankedCommunity> ranked;
    /// Registry communities with no present value in the period.
    std::vector<std::string> without_data;
};

CommunityMeans community_means(const AnalyticsSnapshot& snap, MetricId metric, YearFilter years);

/// First k entries of community_means; k past the end yields the whole list.
std::vector<RankedCommunity> top_k(const AnalyticsSnapshot& snap, MetricId metric,
                                   YearFilter years, std::size_t k);

struct RankInfo {
    std::size_t from_best = 0;
    std::size_t from_worst = 0;
    std::size_t total = 0;
};

/// Throws UnknownCommunity, or NoData when the community has no value in the period.
RankInfo rank_community(const AnalyticsSnapshot& snap, MetricId metric, YearFilter years,
                        std::string_view community);

// ---------------------------------------------------------------------------
// Bars

struct Bar {
    SelectionLevel level = SelectionLevel::Community;
    std::string key;    // community id, urbanicity label, region slug or "all"
    std::string label;  // display string
    std::size_t respondents = 0;
    /// nullopt when the selection has no present value (EmptySelection).
    std::optional<SummaryCell> cell;
    /// Unweighted mean of the member communities' means; diagnostic only.
    std::optional<double> community_averaged_mean;
};

/// Community, its urbanicity group, its region, all. Throws UnknownCommunity.
std::array<Bar, 4> bar_chart_data(const AnalyticsSnapshot& snap, MetricId metric,
                                  YearFilter years, std::string_view community);

// ---------------------------------------------------------------------------
// Correlations

struct CorrelationEntry {
    MetricId metric = MetricId::SocialOfferings;
    /// nullopt when undefined: fewer than two pairs or a constant variable.
    std::optional<double> r;
    std::size_t n_pairs = 0;
};

/// Two-pass Pearson r with pairwise deletion. nullopt when undefined.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Pearson r of each non-attachment metric against attachment, in enumeration order.
std::vector<CorrelationEntry> correlation_profile(const AnalyticsSnapshot& snap, const Selection& sel);

/// correlation_profile over every community.
std::vector<CorrelationEntry> reference_profile(const AnalyticsSnapshot& snap, YearFilter years);

// ---------------------------------------------------------------------------
// Map

struct MapRecord {
    std::size_t community = 0;
    std::string id;
    std::string display_name;
    double latitude = 0.0;
    double longitude = 0.0;
    /// All respondents in the period, regardless of missingness.
    std::size_t n = 0;
    std::optional<SummaryCell> cell;
};

std::vector<MapRecord> map_summary(const AnalyticsSnapshot& snap, MetricId metric, YearFilter years);

// ---------------------------------------------------------------------------
// 2-D binning

struct Histogram2d {
    MetricId x_metric = MetricId::Openness;
    MetricId y_metric = MetricId::CommunityAttachment;
    std::vector<double> x_edges;  // nx + 1 edges spanning the metric scale
    std::vector<double> y_edges;
    /// counts[ix][iy]
    std::vector<std::vector<std::size_t>> counts;
    std::size_t total = 0;
};

/// Index of the equal-width bin holding v. Bins are [e_i, e_{i+1}), the last one closed.
std::size_t bin_index(std::span<const double> edges, double v) noexcept;
std::vector<double> bin_edges(const Scale& scale, std::size_t bins);

/// Throws BadParameter for nx or ny of zero, EmptySelection when no respondent has both metrics.
Histogram2d bin2d(const AnalyticsSnapshot& snap, MetricId x, MetricId y, const Selection& sel,
                  std::size_t nx, std::size_t ny);

// ---------------------------------------------------------------------------
// Yearly series

struct YearlySeries {
    std::size_t community = 0;
    std::string id;
    std::string display_name;
    std::map<int, SummaryCell> by_year;  // years without data omitted
    std::optional<SummaryCell> aggregate;
};

/// Sorted ascending by the all-years aggregate mean; communities with no data last.
/// Throws BadParameter for an empty list, UnknownCommunity for an unknown id.
std::vector<YearlySeries> yearly_series(const AnalyticsSnapshot& snap, MetricId metric,
                                        std::span<const std::string> communities);

// ---------------------------------------------------------------------------
// Parallel coordinates

struct Polyline {
    std::size_t community = 0;
    std::string id;
    std::string display_name;
    std::vector<std::optional<double>> values;  // one per axis
};

struct ParallelCoordinates {
    /// Attachment first, then the other metrics by descending overall mean.
    std::vector<MetricId> axes;
    std::vector<std::optional<double>> overall_means;  // one per axis
    std::vector<Polyline> lines;                       // registry order
};

ParallelCoordinates parallel_coordinates(const AnalyticsSnapshot& snap, YearFilter years);

// ---------------------------------------------------------------------------
// Density

inline constexpr std::size_t kMinDensityGridPoints = 16;

/// 1.06 * sample standard deviation * n^(-1/5).
double silverman_bandwidth(std::span<const double> samples);

/// Gaussian kernel density of `samples` at each of `points`.
std::vector<double> kde_evaluate(std::span<const double> samples, double bandwidth,
                                 std::span<const double> points);

struct DensityEstimate {
    std::vector<double> grid;
    std::vector<double> density;
    double bandwidth = 0.0;
    std::size_t n = 0;
};

/// Present values of `metric` under `sel`, in snapshot order.
std::vector<double> collect_values(const AnalyticsSnapshot& snap, MetricId metric, const Selection& sel);

/// Throws BadParameter when grid_points < 16, DegenerateSample for n < 2 or zero variance.
DensityEstimate density_estimate(const AnalyticsSnapshot& snap, MetricId metric,
                                 const Selection& sel, std::size_t grid_points);

}  // namespace attache
