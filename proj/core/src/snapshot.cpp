#include "attache/snapshot.hpp"

#include "attache/error.hpp"

namespace attache {

AnalyticsSnapshot::AnalyticsSnapshot(std::shared_ptr<const CommunityRegistry> registry,
                                     std::vector<ResponseBlock> blocks, Provenance provenance)
    : registry_(std::move(registry)), blocks_(std::move(blocks)), provenance_(std::move(provenance)) {
    if (blocks_.size() != registry_->size() * kSurveyYears.size()) {
        throw Error(ErrorCode::BadParameter, "snapshot needs one block per (community, year)");
    }
    for (const auto& b : blocks_) total_ += b.rows;
}

AnalyticsSnapshot build_snapshot(const ResponseTable& table) {
    const auto& registry = table.registry();
    std::vector<ResponseBlock> blocks(registry.size() * kSurveyYears.size());
    for (const auto& r : table.responses()) {
        auto& block = blocks[r.community * kSurveyYears.size() + year_index(r.year)];
        ++block.rows;
        for (std::size_t m = 0; m < kMetricCount; ++m) {
            const auto& v = r.metrics[m];
            block.values[m].push_back(v.value_or(0.0));
            block.present[m].push_back(v ? 1 : 0);
        }
    }
    return AnalyticsSnapshot(table.registry_ptr(), std::move(blocks), table.provenance());
}

}  // namespace attache
