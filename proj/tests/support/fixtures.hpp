#pragma once

#include "attache/ingestion.hpp"
#include "attache/registry.hpp"
#include "attache/snapshot.hpp"
#include "attache/synth.hpp"

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#ifndef ATTACHE_TEST_DATA_DIR
#error "ATTACHE_TEST_DATA_DIR must point at the repository data/ directory"
#endif

namespace attache::testing {

inline std::string data_path(const std::string& name) { return std::string(ATTACHE_TEST_DATA_DIR) + "/" + name; }

inline const CommunityRegistry& default_registry() {
    static const CommunityRegistry registry = load_registry(data_path("registry.csv"));
    return registry;
}

struct LoadedFixture {
    synth::Fixture fixture;
    ResponseTable table;
    AnalyticsSnapshot snapshot;
};

inline LoadedFixture load_fixture(const synth::Options& options, const CommunityRegistry& registry = default_registry()) {
    auto fixture = synth::generate(registry, options);
    std::istringstream in(fixture.csv);
    auto table = parse_survey(in, parse_mapping(fixture.mapping_json), registry);
    auto snap = build_snapshot(table);
    return {std::move(fixture), std::move(table), std::move(snap)};
}

/// Shared 1,000-row fixture (seed 20130801, 5% malformed).
inline const LoadedFixture& thousand_row_fixture() {
    static const LoadedFixture f = load_fixture(synth::Options{});
    return f;
}

inline SurveyResponse response(const CommunityRegistry& registry, const std::string& id, int year,
                               std::initializer_list<std::pair<MetricId, double>> values) {
    SurveyResponse r;
    r.community = *registry.index_of(id);
    r.year = year;
    for (const auto& [m, v] : values) r.metrics[index_of(m)] = v;
    return r;
}

inline AnalyticsSnapshot snapshot_of(std::vector<SurveyResponse> responses,
                                     const CommunityRegistry& registry = default_registry()) {
    ResponseTable table(std::move(responses), std::make_shared<const CommunityRegistry>(registry), Provenance{});
    return build_snapshot(table);
}

}  // namespace attache::testing
