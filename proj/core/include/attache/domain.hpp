#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace attache {

// ---------------------------------------------------------------------------
// Metrics

enum class MetricId : std::uint8_t {
    CommunityAttachment,
    SocialOfferings,
    Openness,
    Aesthetics,
    Education,
    BasicServices,
    Leadership,
    Economy,
    Safety,
    SocialCapital,
    CivicInvolvement,
};

inline constexpr std::size_t kMetricCount = 11;

inline constexpr std::array<MetricId, kMetricCount> kAllMetrics = {
    MetricId::CommunityAttachment, MetricId::SocialOfferings, MetricId::Openness,
    MetricId::Aesthetics,          MetricId::Education,       MetricId::BasicServices,
    MetricId::Leadership,          MetricId::Economy,         MetricId::Safety,
    MetricId::SocialCapital,       MetricId::CivicInvolvement,
};

/// The correlation target; every other metric is profiled against it.
inline constexpr MetricId kAttachment = MetricId::CommunityAttachment;

constexpr std::size_t index_of(MetricId m) noexcept { return static_cast<std::size_t>(m); }

/// Lower snake case, e.g. "social_offerings". Used on the wire and in config.
std::string_view slug(MetricId m) noexcept;
std::string_view display_name(MetricId m) noexcept;
std::optional<MetricId> metric_from_slug(std::string_view s) noexcept;

struct Scale {
    double min = 1.0;
    double max = 3.0;

    bool contains(double v) const noexcept { return v >= min && v <= max; }
    double midpoint() const noexcept { return 0.5 * (min + max); }
};

struct MetricDefinition {
    MetricId id = MetricId::CommunityAttachment;
    std::vector<std::string> component_questions;
    Scale scale;
};

/// Built-in catalog entry. Attachment is scored 1-5, everything else 1-3.
const MetricDefinition& metric_definition(MetricId m);

// ---------------------------------------------------------------------------
// Regions and years

enum class RegionId : std::uint8_t { GreatPlains, West, DeepSouth, Southeast, RustBelt };

inline constexpr std::array<RegionId, 5> kAllRegions = {
    RegionId::GreatPlains, RegionId::West, RegionId::DeepSouth, RegionId::Southeast,
    RegionId::RustBelt,
};

std::string_view slug(RegionId r) noexcept;
std::string_view display_name(RegionId r) noexcept;
std::optional<RegionId> region_from_slug(std::string_view s) noexcept;

inline constexpr std::array<int, 3> kSurveyYears = {2008, 2009, 2010};

constexpr bool is_survey_year(int year) noexcept {
    return year == 2008 || year == 2009 || year == 2010;
}

/// Position of a survey year in kSurveyYears. Caller guarantees validity.
constexpr std::size_t year_index(int year) noexcept { return static_cast<std::size_t>(year - 2008); }

class YearFilter {
public:
    static YearFilter all() noexcept { return YearFilter{}; }
    /// Throws Error(BadParameter) for a year outside the survey.
    static YearFilter single(int year);
    /// Accepts "2008", "2009", "2010" or "all".
    static YearFilter parse(std::string_view text);

    bool is_all() const noexcept { return !year_; }
    std::optional<int> year() const noexcept { return year_; }
    bool matches(int year) const noexcept { return !year_ || *year_ == year; }
    std::string to_string() const;

    friend bool operator==(const YearFilter&, const YearFilter&) = default;

private:
    std::optional<int> year_;
};

// ---------------------------------------------------------------------------
// Selections

enum class SelectionLevel : std::uint8_t { Community, Urbanicity, Region, All };

std::string_view slug(SelectionLevel level) noexcept;
std::optional<SelectionLevel> level_from_slug(std::string_view s) noexcept;

struct CommunityScope {
    std::string id;
    friend bool operator==(const CommunityScope&, const CommunityScope&) = default;
};
struct UrbanicityScope {
    std::string label;
    friend bool operator==(const UrbanicityScope&, const UrbanicityScope&) = default;
};
struct RegionScope {
    RegionId region;
    friend bool operator==(const RegionScope&, const RegionScope&) = default;
};
struct AllScope {
    friend bool operator==(const AllScope&, const AllScope&) = default;
};

using Scope = std::variant<CommunityScope, UrbanicityScope, RegionScope, AllScope>;

struct Selection {
    Scope scope = AllScope{};
    YearFilter years;

    static Selection community(std::string id, YearFilter years = YearFilter::all()) {
        return {CommunityScope{std::move(id)}, years};
    }
    static Selection urbanicity(std::string label, YearFilter years = YearFilter::all()) {
        return {UrbanicityScope{std::move(label)}, years};
    }
    static Selection region(RegionId r, YearFilter years = YearFilter::all()) {
        return {RegionScope{r}, years};
    }
    static Selection everything(YearFilter years = YearFilter::all()) { return {AllScope{}, years}; }

    SelectionLevel level() const noexcept { return static_cast<SelectionLevel>(scope.index()); }

    friend bool operator==(const Selection&, const Selection&) = default;
};

// ---------------------------------------------------------------------------
// Responses

using MetricValues = std::array<std::optional<double>, kMetricCount>;

struct SurveyResponse {
    /// Index into the owning table's registry.
    std::size_t community = 0;
    int year = 2008;
    MetricValues metrics{};

    const std::optional<double>& operator[](MetricId m) const noexcept { return metrics[index_of(m)]; }
};

/// Lowercase, runs of non-alphanumerics collapsed to '-', trimmed. "St. Paul, MN" -> "st-paul-mn".
std::string slugify(std::string_view text);

}  // namespace attache
