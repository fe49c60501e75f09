#include "attache/synth.hpp"

#include "attache/csv.hpp"
#include "attache/domain.hpp"
#include "attache/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

namespace attache::synth {

namespace {

// Raw engine output only; std distributions are implementation-defined and
// would make fixtures differ between standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

constexpr MetricId kPrecomputed = MetricId::CivicInvolvement;
constexpr std::array<const char*, 4> kSentinels = {"", "NA", "DK", "REFUSED"};

std::string question_column(MetricId m, std::size_t q) {
    return std::string(slug(m)) + "_q" + std::to_string(q + 1);
}

std::string format_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

Fixture generate(const CommunityRegistry& registry, const Options& options) {
    if (registry.size() == 0) throw Error(ErrorCode::BadParameter, "fixture needs a non-empty registry");
    if (options.malformed_fraction < 0.0 || options.malformed_fraction > 1.0) {
        throw Error(ErrorCode::BadParameter, "malformed_fraction must lie in [0, 1]");
    }
    Rng rng(options.seed);

    // Per-fixture structure: community effects, metric loadings and offsets.
    std::vector<double> effect(registry.size());
    std::vector<double> weight(registry.size());
    double total_weight = 0.0;
    for (std::size_t c = 0; c < registry.size(); ++c) {
        effect[c] = 0.5 * rng.normal();
        weight[c] = 1.0 + static_cast<double>(c % 5);
        total_weight += weight[c];
    }
    std::array<double, kMetricCount> loading{};
    std::array<double, kMetricCount> offset{};
    for (auto m : kAllMetrics) {
        loading[index_of(m)] = 0.2 + 0.7 * rng.uniform();
        offset[index_of(m)] = 0.6 * (rng.uniform() - 0.5);
    }

    // Header.
    std::vector<std::string> header = {"community", "year"};
    if (options.with_urbanicity) header.push_back("urbanicity");
    for (auto m : kAllMetrics) {
        if (m == kPrecomputed) {
            header.push_back(std::string(slug(m)) + "_index");
        } else {
            for (std::size_t q = 0; q < metric_definition(m).component_questions.size(); ++q) {
                header.push_back(question_column(m, q));
            }
        }
    }
    const std::size_t first_answer = options.with_urbanicity ? 3 : 2;

    // Corrupted rows: exact count, chosen by partial Fisher-Yates.
    const auto bad_count = static_cast<std::size_t>(
        std::llround(static_cast<double>(options.rows) * options.malformed_fraction));
    std::vector<std::size_t> order(options.rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i + 1;
    for (std::size_t i = 0; i < bad_count; ++i) std::swap(order[i], order[i + rng.below(options.rows - i)]);
    std::vector<std::size_t> malformed(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(bad_count));
    std::sort(malformed.begin(), malformed.end());

    std::ostringstream out;
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';

    std::size_t next_bad = 0;
    std::vector<std::string> fields;
    for (std::size_t row = 1; row <= options.rows; ++row) {
        // Community by weight.
        double pick = rng.uniform() * total_weight;
        std::size_t c = 0;
        while (c + 1 < registry.size() && pick >= weight[c]) pick -= weight[c++];
        const int year = kSurveyYears[rng.below(kSurveyYears.size())];
        const double attitude = effect[c] + rng.normal();

        fields.clear();
        fields.push_back(registry[c].display_name);
        fields.push_back(std::to_string(year));
        if (options.with_urbanicity) fields.push_back(registry[c].urbanicity);
        for (auto m : kAllMetrics) {
            const auto& def = metric_definition(m);
            const double lam = loading[index_of(m)];
            const double half = 0.5 * (def.scale.max - def.scale.min);
            auto answer = [&] {
                const double z = lam * attitude + std::sqrt(1.0 - lam * lam) * rng.normal();
                const double v = std::round(def.scale.midpoint() + half * (offset[index_of(m)] + 0.55 * z));
                return std::clamp(v, def.scale.min, def.scale.max);
            };
            if (m == kPrecomputed) {
                double sum = 0.0;
                for (std::size_t q = 0; q < def.component_questions.size(); ++q) sum += answer();
                if (rng.uniform() < options.missing_rate) {
                    fields.push_back(kSentinels[rng.below(kSentinels.size())]);
                } else {
                    fields.push_back(format_value(sum / static_cast<double>(def.component_questions.size())));
                }
                continue;
            }
            for (std::size_t q = 0; q < def.component_questions.size(); ++q) {
                const double v = answer();
                if (rng.uniform() < options.missing_rate) {
                    fields.push_back(kSentinels[rng.below(kSentinels.size())]);
                } else {
                    fields.push_back(format_value(v));
                }
            }
        }

        if (next_bad < malformed.size() && malformed[next_bad] == row) {
            ++next_bad;
            const std::size_t answer_col = first_answer + rng.below(fields.size() - first_answer);
            switch (rng.below(5)) {
                case 0: fields[1] = "2011"; break;
                case 1: fields[0] = "Atlantis, ZZ"; break;
                case 2: fields[answer_col] = "7"; break;
                case 3: fields[answer_col] = "abc"; break;
                default: fields.pop_back(); break;
            }
        }

        for (std::size_t i = 0; i < fields.size(); ++i) out << (i ? "," : "") << csv::escape(fields[i]);
        out << '\n';
    }

    nlohmann::ordered_json mapping;
    mapping["community_column"] = "community";
    mapping["year_column"] = "year";
    if (options.with_urbanicity) mapping["urbanicity_column"] = "urbanicity";
    mapping["delimiter"] = ",";
    mapping["missing_values"] = {"", "NA", "REFUSED", "DK"};
    auto& metrics = mapping["metrics"];
    for (auto m : kAllMetrics) {
        const auto& def = metric_definition(m);
        if (m == kPrecomputed) {
            metrics[std::string(slug(m))] = {{"column", std::string(slug(m)) + "_index"}};
            continue;
        }
        auto questions = nlohmann::ordered_json::array();
        for (std::size_t q = 0; q < def.component_questions.size(); ++q) {
            questions.push_back({{"column", question_column(m, q)}, {"scale", {def.scale.min, def.scale.max}}});
        }
        metrics[std::string(slug(m))] = {{"questions", questions}};
    }

    return {out.str(), mapping.dump(2) + "\n", std::move(malformed)};
}

}  // namespace attache::synth
