#pragma once

#include "attache/domain.hpp"
#include "attache/registry.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace attache {

// ---------------------------------------------------------------------------
// Column mapping

struct QuestionColumn {
    std::string column;
    Scale scale;
    /// Raw cell text -> value (nullopt marks the code as missing). Applied before numeric parsing.
    std::map<std::string, std::optional<double>, std::less<>> recode;
};

/// A metric is derived from its component questions or read from a precomputed column.
using MetricSource = std::variant<std::vector<QuestionColumn>, std::string>;

struct ColumnMapping {
    std::string community_column;
    std::string year_column;
    /// When set, urbanicity labels are taken from the survey file instead of the registry.
    std::optional<std::string> urbanicity_column;
    char delimiter = ',';
    std::vector<std::string> missing_values = {"", "NA", "REFUSED", "DK"};
    /// Raw community cell -> registry id. Unlisted cells are matched by slug.
    std::map<std::string, std::string, std::less<>> community_codes;
    /// Raw year cell -> survey year. Unlisted cells are parsed as integers.
    std::map<std::string, int, std::less<>> year_codes;
    std::array<MetricSource, kMetricCount> metrics;

    const MetricSource& source(MetricId m) const noexcept { return metrics[index_of(m)]; }
};

/// Parses the JSON mapping document. Throws Error(InvalidMapping).
ColumnMapping parse_mapping(std::string_view json_text);
ColumnMapping load_mapping(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Derivation

/// Mean of the answered component questions, present only when at least
/// ceil(k/2) of the k questions were answered.
/// Throws Error(ScaleViolation) for an answer outside the metric scale and
/// Error(BadParameter) when answers.size() differs from the component count.
std::optional<double> derive_metric(std::span<const std::optional<double>> answers,
                                    const MetricDefinition& def);

// ---------------------------------------------------------------------------
// Response table

struct Provenance {
    std::string source_sha256;
    std::size_t data_rows = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    /// reason -> count; reasons are short snake case tags.
    std::map<std::string, std::size_t> rejection_reasons;
    /// 1-based data-row numbers (header excluded) of rejected rows.
    std::vector<std::size_t> rejected_rows;
    /// Communities whose urbanicity cells disagreed; the majority label was kept.
    std::vector<std::string> urbanicity_conflicts;
};

class ResponseTable {
public:
    ResponseTable(std::vector<SurveyResponse> responses,
                  std::shared_ptr<const CommunityRegistry> registry, Provenance provenance);

    const std::vector<SurveyResponse>& responses() const noexcept { return responses_; }
    const CommunityRegistry& registry() const noexcept { return *registry_; }
    std::shared_ptr<const CommunityRegistry> registry_ptr() const noexcept { return registry_; }
    const Provenance& provenance() const noexcept { return provenance_; }

private:
    std::vector<SurveyResponse> responses_;
    std::shared_ptr<const CommunityRegistry> registry_;
    Provenance provenance_;
};

/// One SurveyResponse per accepted row. Rows with unknown community or year,
/// unparseable or out-of-range cells, or the wrong field count are rejected
/// and counted. Throws MissingColumn, EmptyInput.
ResponseTable parse_survey(std::istream& in, const ColumnMapping& mapping,
                           const CommunityRegistry& registry);
ResponseTable load_survey(const std::filesystem::path& path, const ColumnMapping& mapping,
                          const CommunityRegistry& registry);

/// Hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

}  // namespace attache
