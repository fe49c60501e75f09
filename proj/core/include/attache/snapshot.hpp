#pragma once

#include "attache/domain.hpp"
#include "attache/ingestion.hpp"
#include "attache/registry.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace attache {

/// Responses of one community in one survey year, stored column-wise.
/// Row r of every metric column belongs to the same respondent.
struct ResponseBlock {
    std::size_t rows = 0;
    std::array<std::vector<double>, kMetricCount> values;
    std::array<std::vector<std::uint8_t>, kMetricCount> present;

    const std::vector<double>& column(MetricId m) const noexcept { return values[index_of(m)]; }
    const std::vector<std::uint8_t>& mask(MetricId m) const noexcept { return present[index_of(m)]; }
};

/// Immutable, query-ready form of a ResponseTable, indexed by (community, year).
class AnalyticsSnapshot {
public:
    AnalyticsSnapshot(std::shared_ptr<const CommunityRegistry> registry,
                      std::vector<ResponseBlock> blocks, Provenance provenance);

    const CommunityRegistry& registry() const noexcept { return *registry_; }
    std::shared_ptr<const CommunityRegistry> registry_ptr() const noexcept { return registry_; }
    const Provenance& provenance() const noexcept { return provenance_; }

    const ResponseBlock& block(std::size_t community, int year) const {
        return blocks_.at(community * kSurveyYears.size() + year_index(year));
    }

    std::size_t total_respondents() const noexcept { return total_; }
    bool empty() const noexcept { return total_ == 0; }

private:
    std::shared_ptr<const CommunityRegistry> registry_;
    std::vector<ResponseBlock> blocks_;
    Provenance provenance_;
    std::size_t total_ = 0;
};

AnalyticsSnapshot build_snapshot(const ResponseTable& table);

}  // namespace attache
