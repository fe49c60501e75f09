#include "attache/domain.hpp"

#include "attache/error.hpp"

#include <cctype>
#include <charconv>

namespace attache {

namespace {

struct MetricInfo {
    std::string_view slug;
    std::string_view display;
};

constexpr std::array<MetricInfo, kMetricCount> kMetricInfo = {{
    {"community_attachment", "Community Attachment"},
    {"social_offerings", "Social Offerings"},
    {"openness", "Openness"},
    {"aesthetics", "Aesthetics"},
    {"education", "Education"},
    {"basic_services", "Basic Services"},
    {"leadership", "Leadership"},
    {"economy", "Economy"},
    {"safety", "Safety"},
    {"social_capital", "Social Capital"},
    {"civic_involvement", "Civic Involvement"},
}};

constexpr std::array<MetricInfo, 5> kRegionInfo = {{
    {"great_plains", "Great Plains"},
    {"west", "West"},
    {"deep_south", "Deep South"},
    {"southeast", "Southeast"},
    {"rust_belt", "Rust Belt"},
}};

constexpr std::array<std::string_view, 4> kLevelSlugs = {"community", "urbanicity", "region", "all"};

std::array<MetricDefinition, kMetricCount> make_catalog() {
    const Scale three{1.0, 3.0};
    return {{
        {MetricId::CommunityAttachment,
         {"proud_to_live_here", "perfect_place_for_me", "satisfaction_as_place_to_live",
          "recommend_to_friend", "outlook_in_five_years"},
         Scale{1.0, 5.0}},
        {MetricId::SocialOfferings,
         {"vibrant_nightlife", "good_place_to_meet_people", "people_care_about_each_other"},
         three},
        {MetricId::Openness,
         {"open_to_young_graduates", "open_to_immigrants", "open_to_families_with_children",
          "open_to_gay_and_lesbian_people", "open_to_senior_citizens"},
         three},
        {MetricId::Aesthetics, {"parks_playgrounds_trails", "beauty_of_physical_setting"}, three},
        {MetricId::Education, {"public_school_quality", "college_university_quality"}, three},
        {MetricId::BasicServices, {"highway_system", "affordable_housing", "quality_healthcare"}, three},
        {MetricId::Leadership, {"elected_official_leadership", "leaders_represent_my_interests"}, three},
        {MetricId::Economy,
         {"job_opportunities", "economic_conditions_today", "economy_getting_better",
          "job_supports_family", "good_time_to_find_job", "job_satisfaction"},
         three},
        {MetricId::Safety, {"safe_walking_at_night", "crime_level"}, three},
        {MetricId::SocialCapital,
         {"groups_and_clubs", "close_friends_nearby", "family_nearby", "talk_with_neighbors"},
         three},
        {MetricId::CivicInvolvement,
         {"local_volunteer_work", "attended_public_meeting", "voted_locally",
          "worked_with_residents_for_change"},
         three},
    }};
}

template <std::size_t N>
std::optional<std::size_t> find_slug(const std::array<MetricInfo, N>& table, std::string_view s) {
    for (std::size_t i = 0; i < N; ++i) {
        if (table[i].slug == s) return i;
    }
    return std::nullopt;
}

}  // namespace

std::string_view slug(MetricId m) noexcept { return kMetricInfo[index_of(m)].slug; }
std::string_view display_name(MetricId m) noexcept { return kMetricInfo[index_of(m)].display; }

std::optional<MetricId> metric_from_slug(std::string_view s) noexcept {
    if (auto i = find_slug(kMetricInfo, s)) return kAllMetrics[*i];
    return std::nullopt;
}

const MetricDefinition& metric_definition(MetricId m) {
    static const auto catalog = make_catalog();
    return catalog[index_of(m)];
}

std::string_view slug(RegionId r) noexcept { return kRegionInfo[static_cast<std::size_t>(r)].slug; }
std::string_view display_name(RegionId r) noexcept {
    return kRegionInfo[static_cast<std::size_t>(r)].display;
}

std::optional<RegionId> region_from_slug(std::string_view s) noexcept {
    if (auto i = find_slug(kRegionInfo, s)) return kAllRegions[*i];
    return std::nullopt;
}

std::string_view slug(SelectionLevel level) noexcept {
    return kLevelSlugs[static_cast<std::size_t>(level)];
}

std::optional<SelectionLevel> level_from_slug(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kLevelSlugs.size(); ++i) {
        if (kLevelSlugs[i] == s) return static_cast<SelectionLevel>(i);
    }
    return std::nullopt;
}

YearFilter YearFilter::single(int year) {
    if (!is_survey_year(year)) {
        throw Error(ErrorCode::BadParameter,
                    "year " + std::to_string(year) + " is not a survey year (2008, 2009, 2010)");
    }
    YearFilter f;
    f.year_ = year;
    return f;
}

YearFilter YearFilter::parse(std::string_view text) {
    if (text == "all") return all();
    int year = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, year);
    if (ec != std::errc{} || ptr != end) {
        throw Error(ErrorCode::BadParameter,
                    "years must be 2008, 2009, 2010 or all, got '" + std::string(text) + "'");
    }
    return single(year);
}

std::string YearFilter::to_string() const { return year_ ? std::to_string(*year_) : "all"; }

std::string slugify(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_dash = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (pending_dash && !out.empty()) out.push_back('-');
            pending_dash = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_dash = true;
        }
    }
    return out;
}

}  // namespace attache
