// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails; skipped criteria do not fail the run.

#include "attache/analytics.hpp"
#include "attache/error.hpp"
#include "attache/ingestion.hpp"
#include "attache/service.hpp"
#include "attache/synth.hpp"

#include "support/api_calls.hpp"
#include "support/fixtures.hpp"
#include "support/oracle.hpp"
#include "support/schema_check.hpp"

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace attache::acceptance {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;
using testing::default_registry;

enum class Status { Pass, Fail, Skip };

struct Outcome {
    Status status = Status::Pass;
    std::string detail;
};

/// Collects failed expectations, keeping the first few messages.
class Tally {
public:
    void expect(bool ok, const std::string& what) {
        ++checks_;
        if (ok) return;
        ++failures_;
        if (messages_.size() < 5) messages_.push_back(what);
    }
    void near(double actual, double expected, double tol, const std::string& what) {
        const double err = std::abs(actual - expected);
        max_error_ = std::max(max_error_, err);
        std::ostringstream msg;
        msg.precision(17);
        msg << what << ": " << actual << " vs " << expected;
        expect(err <= tol, msg.str());
    }
    bool ok() const { return failures_ == 0; }
    std::size_t checks() const { return checks_; }
    double max_error() const { return max_error_; }
    std::string failures() const {
        std::string out = std::to_string(failures_) + " of " + std::to_string(checks_) + " checks failed";
        for (const auto& m : messages_) out += "; " + m;
        return out;
    }

private:
    std::size_t checks_ = 0;
    std::size_t failures_ = 0;
    double max_error_ = 0.0;
    std::vector<std::string> messages_;
};

std::vector<YearFilter> year_filters() {
    std::vector<YearFilter> out{YearFilter::all()};
    for (int y : kSurveyYears) out.push_back(YearFilter::single(y));
    return out;
}

std::vector<Selection> selections(const CommunityRegistry& registry, YearFilter years) {
    std::vector<Selection> out{Selection::everything(years)};
    for (const auto& c : registry.communities()) out.push_back(Selection::community(c.id, years));
    for (const auto& label : registry.urbanicity_labels()) out.push_back(Selection::urbanicity(label, years));
    for (auto r : kAllRegions) out.push_back(Selection::region(r, years));
    return out;
}

std::string describe(const Selection& sel) {
    std::string id;
    if (auto* c = std::get_if<CommunityScope>(&sel.scope)) id = c->id;
    if (auto* u = std::get_if<UrbanicityScope>(&sel.scope)) id = u->label;
    if (auto* r = std::get_if<RegionScope>(&sel.scope)) id = std::string(slug(r->region));
    return std::string(slug(sel.level())) + "(" + id + ")/" + sel.years.to_string();
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << v;
    return out.str();
}

// ---------------------------------------------------------------------------
// 1. Oracle equivalence

Outcome oracle_equivalence() {
    constexpr double tol = 1e-12;
    const auto start = Clock::now();
    const auto f = testing::load_fixture(synth::Options{});
    const auto& reg = f.table.registry();
    Tally t;

    for (auto years : year_filters()) {
        for (const auto& sel : selections(reg, years)) {
            const auto keep = oracle::selection_filter(reg, sel);
            for (auto m : kAllMetrics) {
                const auto expected = oracle::group_mean(f.table, m, keep);
                const std::string what = "mean_metric " + std::string(slug(m)) + " " + describe(sel);
                try {
                    const auto cell = mean_metric(f.snapshot, m, sel);
                    t.expect(expected.mean.has_value(), what + " returned a value for an empty oracle group");
                    if (expected.mean) t.near(cell.mean, *expected.mean, tol, what);
                    t.expect(cell.n == expected.n && cell.n_missing == expected.n_missing, what + " counts");
                } catch (const Error& e) {
                    t.expect(!expected.mean && e.code() == ErrorCode::EmptySelection, what + " threw " + e.what());
                }
            }
            const auto profile = correlation_profile(f.snapshot, sel);
            t.expect(profile.size() == kMetricCount - 1, "correlation_profile size");
            for (const auto& e : profile) {
                const auto expected = oracle::pearson(f.table, kAttachment, e.metric, keep);
                const std::string what = "correlation " + std::string(slug(e.metric)) + " " + describe(sel);
                t.expect(e.n_pairs == expected.n_pairs, what + " n_pairs");
                t.expect(e.r.has_value() == expected.r.has_value(), what + " definedness");
                if (e.r && expected.r) t.near(*e.r, *expected.r, tol, what);
            }
            if (sel.level() != SelectionLevel::Community) {
                for (auto [x, y] : {std::pair{MetricId::Openness, kAttachment}, std::pair{MetricId::Economy, MetricId::Safety}}) {
                    const auto expected = oracle::bin_counts(f.table, x, y, keep, 10, 10);
                    try {
                        t.expect(bin2d(f.snapshot, x, y, sel, 10, 10).counts == expected, "bin2d " + describe(sel));
                    } catch (const Error& e) {
                        t.expect(e.code() == ErrorCode::EmptySelection, "bin2d threw " + std::string(e.what()));
                    }
                }
            }
        }
        for (auto m : kAllMetrics) {
            const auto expected = oracle::ranked_means(f.table, m, years);
            const auto actual = community_means(f.snapshot, m, years).ranked;
            t.expect(actual.size() == expected.size(), "community_means size");
            for (std::size_t i = 0; i < std::min(actual.size(), expected.size()); ++i) {
                t.expect(actual[i].id == expected[i].id, "community_means order at " + std::to_string(i));
                t.near(actual[i].cell.mean, expected[i].mean, tol, "community_means " + actual[i].id);
            }
            for (const auto& c : reg.communities()) {
                const auto bars = bar_chart_data(f.snapshot, m, years, c.id);
                const std::array<Selection, 4> sels{Selection::community(c.id, years), Selection::urbanicity(c.urbanicity, years),
                                                    Selection::region(c.region, years), Selection::everything(years)};
                for (std::size_t i = 0; i < 4; ++i) {
                    const auto expected_bar = oracle::group_mean(f.table, m, oracle::selection_filter(reg, sels[i]));
                    t.expect(bars[i].cell.has_value() == expected_bar.mean.has_value(), "bar definedness " + c.id);
                    if (bars[i].cell && expected_bar.mean) t.near(bars[i].cell->mean, *expected_bar.mean, tol, "bar " + c.id);
                }
            }
        }
    }
    std::vector<std::string> ids;
    for (const auto& c : reg.communities()) ids.push_back(c.id);
    for (auto m : kAllMetrics) {
        for (const auto& s : yearly_series(f.snapshot, m, ids)) {
            for (int y : kSurveyYears) {
                const auto expected =
                    oracle::group_mean(f.table, m, oracle::selection_filter(reg, Selection::community(s.id, YearFilter::single(y))));
                const auto it = s.by_year.find(y);
                t.expect((it != s.by_year.end()) == expected.mean.has_value(), "series year presence " + s.id);
                if (it != s.by_year.end() && expected.mean) t.near(it->second.mean, *expected.mean, tol, "series " + s.id);
            }
        }
    }

    const double elapsed = seconds_since(start);
    t.expect(elapsed < 10.0, "runtime " + fmt(elapsed) + " s exceeds 10 s");
    const std::string summary = std::to_string(t.checks()) + " checks, max abs error " + fmt(t.max_error(), 17) +
                                ", " + fmt(elapsed, 2) + " s";
    return t.ok() ? Outcome{Status::Pass, summary} : Outcome{Status::Fail, t.failures()};
}

// ---------------------------------------------------------------------------
// 2. Invariants over randomized fixtures

std::optional<double> half_rule(const std::vector<std::optional<double>>& answers) {
    long double sum = 0.0L;
    std::size_t answered = 0;
    for (const auto& a : answers) {
        if (a) {
            sum += *a;
            ++answered;
        }
    }
    if (2 * answered < answers.size()) return std::nullopt;
    return static_cast<double>(sum / static_cast<long double>(answered));
}

void check_fixture_invariants(std::uint64_t seed, Tally& t) {
    synth::Options options;
    options.seed = seed;
    options.rows = 200 + (seed * 37) % 300;
    const auto f = testing::load_fixture(options);
    const auto& reg = f.table.registry();
    const std::string tag = "seed " + std::to_string(seed) + ": ";
    std::mt19937_64 rng(seed);

    for (const auto& r : f.table.responses()) {
        for (auto m : kAllMetrics) {
            if (r[m]) t.expect(metric_definition(m).scale.contains(*r[m]), tag + "response out of scale");
        }
    }

    for (auto years : year_filters()) {
        for (auto m : kAllMetrics) {
            const auto scale = metric_definition(m).scale;
            const auto means = community_means(f.snapshot, m, years);
            double weighted = 0.0;
            std::size_t n = 0;
            for (const auto& c : means.ranked) {
                weighted += c.cell.mean * static_cast<double>(c.cell.n);
                n += c.cell.n;
                t.expect(scale.contains(c.cell.mean), tag + "community mean out of scale");
            }
            if (n > 0) {
                const auto all = mean_metric(f.snapshot, m, Selection::everything(years));
                t.near(all.mean, weighted / static_cast<double>(n), 1e-9, tag + "weighted mean " + std::string(slug(m)));
                t.expect(all.n == n, tag + "weighted mean n");
            }
            for (std::size_t k : {0u, 1u, 5u, 13u, 26u}) {
                const auto top = top_k(f.snapshot, m, years, k);
                t.expect(top.size() == std::min(k, means.ranked.size()), tag + "top_k size");
                for (std::size_t i = 0; i < top.size(); ++i) t.expect(top[i].id == means.ranked[i].id, tag + "top_k prefix");
            }
            for (std::size_t i = 0; i < means.ranked.size(); ++i) {
                const auto rank = rank_community(f.snapshot, m, years, means.ranked[i].id);
                t.expect(rank.from_best == i + 1 && rank.from_best + rank.from_worst == rank.total + 1 &&
                             rank.total == means.ranked.size(),
                         tag + "rank coherence");
            }
        }
    }

    for (const auto& sel : selections(reg, YearFilter::all())) {
        if (sel.level() == SelectionLevel::Community) continue;
        const auto keep = oracle::selection_filter(reg, sel);
        const std::size_t nx = 1 + rng() % 20;
        const std::size_t ny = 1 + rng() % 20;
        const auto x = kAllMetrics[rng() % kMetricCount];
        const auto y = kAllMetrics[rng() % kMetricCount];
        const auto pairs = oracle::pearson(f.table, x, y, keep).n_pairs;
        try {
            const auto h = bin2d(f.snapshot, x, y, sel, nx, ny);
            std::size_t sum = 0;
            for (const auto& col : h.counts) sum = std::accumulate(col.begin(), col.end(), sum);
            t.expect(sum == h.total && h.total == pairs, tag + "bin2d conservation " + describe(sel));
        } catch (const Error& e) {
            t.expect(pairs == 0 && e.code() == ErrorCode::EmptySelection, tag + "bin2d threw " + e.what());
        }
    }

    // One positive affine map per metric applied to every respondent.
    std::array<std::pair<double, double>, kMetricCount> affine;
    for (auto& a : affine) {
        a.first = 0.05 + std::uniform_real_distribution<double>(0.0, 20.0)(rng);
        a.second = std::uniform_real_distribution<double>(-50.0, 50.0)(rng);
    }
    auto moved_rows = f.table.responses();
    for (auto& r : moved_rows) {
        for (std::size_t i = 0; i < kMetricCount; ++i) {
            if (r.metrics[i]) r.metrics[i] = affine[i].first * *r.metrics[i] + affine[i].second;
        }
    }
    const auto moved = build_snapshot(ResponseTable(std::move(moved_rows), f.table.registry_ptr(), Provenance{}));
    for (const auto& sel : selections(reg, YearFilter::all())) {
        const auto a = correlation_profile(f.snapshot, sel);
        const auto b = correlation_profile(moved, sel);
        for (std::size_t i = 0; i < a.size(); ++i) {
            t.expect(a[i].r.has_value() == b[i].r.has_value(), tag + "affine definedness " + describe(sel));
            if (a[i].r && b[i].r) t.near(*a[i].r, *b[i].r, 1e-12, tag + "affine " + describe(sel));
        }
    }

    for (int trial = 0; trial < 50; ++trial) {
        const auto& def = metric_definition(kAllMetrics[rng() % kMetricCount]);
        std::vector<std::optional<double>> answers;
        for (std::size_t q = 0; q < def.component_questions.size(); ++q) {
            if (rng() % 3 == 0) {
                answers.push_back(std::nullopt);
            } else {
                answers.push_back(def.scale.min + static_cast<double>(rng() % 9) / 8.0 * (def.scale.max - def.scale.min));
            }
        }
        const auto expected = half_rule(answers);
        const auto actual = derive_metric(answers, def);
        t.expect(actual.has_value() == expected.has_value(), tag + "half-answered rule");
        if (actual && expected) t.near(*actual, *expected, 1e-12, tag + "derived mean");
        std::shuffle(answers.begin(), answers.end(), rng);
        const auto shuffled = derive_metric(answers, def);
        t.expect(shuffled.has_value() == actual.has_value(), tag + "permutation definedness");
        if (shuffled && actual) t.near(*shuffled, *actual, 1e-12, tag + "permutation");
    }
}

Outcome invariant_suite() {
    Tally t;
    const auto start = Clock::now();
    for (std::uint64_t seed = 1; seed <= 100; ++seed) check_fixture_invariants(seed, t);
    const std::string summary =
        "100 fixtures, " + std::to_string(t.checks()) + " checks, " + fmt(seconds_since(start), 2) + " s";
    return t.ok() ? Outcome{Status::Pass, summary} : Outcome{Status::Fail, t.failures()};
}

// ---------------------------------------------------------------------------
// 3. KDE

Outcome kde_checks() {
    Tally t;
    const auto& f = testing::thousand_row_fixture();
    double lo = 1.0, hi = 1.0;
    for (const auto& sel : selections(f.table.registry(), YearFilter::all())) {
        for (auto m : kAllMetrics) {
            const auto values = collect_values(f.snapshot, m, sel);
            if (values.size() < 2) continue;
            const double h = silverman_bandwidth(values);
            if (!(h > 0.0)) continue;
            const auto scale = metric_definition(m).scale;
            const double a = scale.min - 3 * h;
            const double b = scale.max + 3 * h;
            constexpr std::size_t n = 2001;
            std::vector<double> xs(n);
            for (std::size_t i = 0; i < n; ++i) xs[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
            const auto ys = kde_evaluate(values, h, xs);
            double area = 0.0;
            for (std::size_t i = 1; i < n; ++i) area += 0.5 * (ys[i] + ys[i - 1]) * (xs[i] - xs[i - 1]);
            lo = std::min(lo, area);
            hi = std::max(hi, area);
            t.expect(area >= 0.99 && area <= 1.01, "integral " + fmt(area, 6) + " for " + std::string(slug(m)) + " " + describe(sel));
        }
    }

    // 50-point sample against the direct-sum oracle.
    std::mt19937_64 rng(50);
    std::vector<SurveyResponse> rows;
    std::vector<double> samples;
    for (int i = 0; i < 50; ++i) {
        const double v = 1.0 + std::uniform_real_distribution<double>(0.0, 2.0)(rng);
        samples.push_back(v);
        rows.push_back(testing::response(default_registry(), "akron-oh", kSurveyYears[i % 3], {{MetricId::Economy, v}}));
    }
    const auto snap = testing::snapshot_of(rows);
    const auto est = density_estimate(snap, MetricId::Economy, Selection::everything(), 256);
    const double h = oracle::silverman(samples);
    t.near(est.bandwidth, h, 1e-12, "bandwidth");
    const auto expected = oracle::kde(samples, h, est.grid);
    double max_err = 0.0;
    for (std::size_t i = 0; i < est.grid.size(); ++i) {
        max_err = std::max(max_err, std::abs(est.density[i] - expected[i]));
        t.near(est.density[i], expected[i], 1e-9, "density at " + fmt(est.grid[i]));
    }
    const std::string summary = "integrals in [" + fmt(lo, 5) + ", " + fmt(hi, 5) +
                                "], 50-point oracle max abs error " + fmt(max_err, 17);
    return t.ok() ? Outcome{Status::Pass, summary} : Outcome{Status::Fail, t.failures()};
}

// ---------------------------------------------------------------------------
// 4. Real data

double round2(double v) { return std::round(v * 100.0) / 100.0; }

Outcome real_data() {
    const char* data = std::getenv("ATTACHE_SOTC_DATA");
    const char* mapping = std::getenv("ATTACHE_SOTC_MAPPING");
    if (!data || !mapping) {
        return {Status::Skip, "set ATTACHE_SOTC_DATA and ATTACHE_SOTC_MAPPING to the public survey export to run"};
    }
    const char* registry_env = std::getenv("ATTACHE_SOTC_REGISTRY");
    const auto registry = registry_env ? load_registry(registry_env) : default_registry();
    const auto table = load_survey(data, load_mapping(mapping), registry);
    const auto snap = build_snapshot(table);
    Tally t;

    struct Row {
        std::string id;
        double value;
    };
    const std::vector<Row> openness{{"long-beach-ca", 1.95}, {"san-jose-ca", 1.88}, {"st-paul-mn", 1.88},
                                    {"state-college-pa", 1.87}, {"boulder-co", 1.84}};
    const auto top = top_k(snap, MetricId::Openness, YearFilter::all(), 5);
    t.expect(top.size() == 5, "fewer than 5 communities with openness data");
    for (std::size_t i = 0; i < std::min<std::size_t>(top.size(), 5); ++i) {
        // Entries that display the same value may appear in either order.
        const bool id_ok = std::any_of(openness.begin(), openness.end(), [&](const Row& r) {
            return r.id == top[i].id && r.value == openness[i].value;
        });
        t.expect(id_ok, "openness #" + std::to_string(i + 1) + " is " + top[i].id);
        t.near(round2(top[i].cell.mean), openness[i].value, 0.005 + 1e-9, "openness " + top[i].id);
    }

    const std::vector<std::string> ids{"detroit-mi", "state-college-pa"};
    const std::map<std::string, std::array<double, 3>> economy{{"detroit-mi", {1.26, 1.25, 1.37}},
                                                               {"state-college-pa", {1.65, 1.59, 1.72}}};
    for (const auto& s : yearly_series(snap, MetricId::Economy, ids)) {
        for (std::size_t y = 0; y < 3; ++y) {
            const auto it = s.by_year.find(kSurveyYears[y]);
            const std::string what = "economy " + s.id + " " + std::to_string(kSurveyYears[y]);
            t.expect(it != s.by_year.end(), what + " missing");
            if (it != s.by_year.end()) t.near(round2(it->second.mean), economy.at(s.id)[y], 0.005 + 1e-9, what);
        }
    }

    const auto y2010 = YearFilter::single(2010);
    const auto macon = rank_community(snap, MetricId::Safety, y2010, "macon-ga");
    const auto columbus = rank_community(snap, MetricId::Safety, y2010, "columbus-ga");
    const auto biloxi = rank_community(snap, MetricId::Safety, y2010, "biloxi-ms");
    t.expect(macon.from_worst == 1, "Macon safety 2010 rank from worst " + std::to_string(macon.from_worst));
    t.expect(columbus.from_worst == 4, "Columbus safety 2010 rank from worst " + std::to_string(columbus.from_worst));
    t.expect(biloxi.from_best == 8, "Biloxi safety 2010 rank from best " + std::to_string(biloxi.from_best));

    std::size_t social = 0;
    for (const auto& c : snap.registry().communities()) {
        const auto profile = correlation_profile(snap, Selection::community(c.id));
        const CorrelationEntry* best = nullptr;
        for (const auto& e : profile) {
            if (e.r && (!best || *e.r > *best->r)) best = &e;
        }
        if (best && best->metric == MetricId::SocialOfferings) ++social;
    }
    t.expect(social == 23, "social_offerings is the strongest correlate in " + std::to_string(social) + " of 26");

    const std::string summary = std::to_string(table.provenance().accepted) + " respondents; openness top five, " +
                                "economy series, safety ranks and correlation argmax (" + std::to_string(social) +
                                "/26) reproduced";
    return t.ok() ? Outcome{Status::Pass, summary} : Outcome{Status::Fail, t.failures()};
}

// ---------------------------------------------------------------------------
// 5. API conformance

void dump_bodies(const std::filesystem::path& dir, const Api& api) {
    std::filesystem::create_directories(dir);
    json manifest = json::array();
    auto write = [&](const std::string& name, const std::string& schema, const std::string& body) {
        std::ofstream(dir / name) << body;
        manifest.push_back({{"file", name}, {"schema", schema + ".json"}});
    };
    std::size_t i = 0;
    for (const auto& call : testing::representative_calls()) {
        write(std::to_string(i++) + "_" + testing::schema_name(call.path) + ".json", testing::schema_name(call.path),
              api.get(call.path, call.params).body);
    }
    for (const auto& call : testing::error_calls()) {
        write(std::to_string(i++) + "_error.json", "error", api.get(call.path, call.params).body);
    }
    std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
}

Outcome api_conformance(const std::optional<std::filesystem::path>& dump_dir, std::size_t large_rows) {
    Tally t;
    const std::filesystem::path schema_dir = ATTACHE_TEST_SCHEMA_DIR;
    std::map<std::string, testing::SchemaCheck> schemas;
    auto schema = [&](const std::string& name) -> const testing::SchemaCheck& {
        auto it = schemas.find(name);
        if (it == schemas.end()) it = schemas.emplace(name, testing::SchemaCheck::load(schema_dir / (name + ".json"))).first;
        return it->second;
    };

    {
        const auto store = std::make_shared<SnapshotStore>(
            std::make_shared<const AnalyticsSnapshot>(testing::thousand_row_fixture().snapshot));
        const Api api(store);
        std::set<std::string> covered;
        for (const auto& call : testing::representative_calls()) {
            const auto first = api.get(call.path, call.params);
            const auto second = api.get(call.path, call.params);
            t.expect(first.status == 200, call.path + " status " + std::to_string(first.status));
            t.expect(first.body == second.body, call.path + " bodies differ between identical requests");
            for (const auto& e : schema(testing::schema_name(call.path)).validate(json::parse(first.body))) {
                t.expect(false, call.path + ": " + e);
            }
            covered.insert(call.path);
        }
        for (const auto& call : testing::error_calls()) {
            const auto res = api.get(call.path, call.params);
            t.expect(res.status >= 400, call.path + " should fail");
            for (const auto& e : schema("error").validate(json::parse(res.body))) t.expect(false, call.path + " error: " + e);
        }
        for (const auto& route : Api::routes()) t.expect(covered.count(route) == 1, route + " not exercised");
        if (dump_dir) dump_bodies(*dump_dir, api);
    }

    // Latency over HTTP on a full-scale synthetic dataset.
    synth::Options options;
    options.rows = large_rows;
    options.seed = 43000;
    options.malformed_fraction = 0.0;
    const auto large = testing::load_fixture(options);
    const auto store = std::make_shared<SnapshotStore>(std::make_shared<const AnalyticsSnapshot>(large.snapshot));
    ServerOptions server_options;
    server_options.port = 0;
    server_options.threads = 2;
    Server server(store, server_options);
    const int port = server.bind();
    std::thread loop([&] { server.listen(); });
    for (int i = 0; i < 400 && !server.running(); ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));

    httplib::Client client("127.0.0.1", port);
    client.set_keep_alive(true);
    client.set_tcp_nodelay(true);
    double worst = 0.0;
    std::string worst_path;
    std::vector<double> latencies;
    for (int round = 0; round < 3; ++round) {
        for (const auto& call : testing::representative_calls()) {
            const httplib::Params params(call.params.begin(), call.params.end());
            const auto start = Clock::now();
            const auto res = client.Get(call.path, params, httplib::Headers{});
            const double ms = seconds_since(start) * 1000.0;
            t.expect(res && res->status == 200, call.path + " over HTTP failed");
            latencies.push_back(ms);
            if (ms > worst) {
                worst = ms;
                worst_path = call.path;
            }
        }
    }
    client.stop();
    server.stop();
    loop.join();
    t.expect(worst < 100.0, "slowest request " + worst_path + " took " + fmt(worst, 1) + " ms");

    std::sort(latencies.begin(), latencies.end());
    const std::string summary = "all routes schema-valid and byte-identical; " + std::to_string(large.table.provenance().accepted) +
                                "-respondent latency median " + fmt(latencies[latencies.size() / 2], 1) +
                                " ms, max " + fmt(worst, 1) + " ms (" + worst_path + ")";
    return t.ok() ? Outcome{Status::Pass, summary} : Outcome{Status::Fail, t.failures()};
}

struct Criterion {
    std::string name;
    std::function<Outcome()> run;
};

}  // namespace
}  // namespace attache::acceptance

int main(int argc, char** argv) {
    using namespace attache::acceptance;
    CLI::App app{"attache acceptance suite"};
    std::optional<std::filesystem::path> dump_dir;
    std::size_t large_rows = 43000;
    app.add_option("--dump-dir", dump_dir, "Write API response bodies and a manifest here");
    app.add_option("--large-rows", large_rows, "Row count of the latency fixture")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {"oracle-equivalence", oracle_equivalence},
        {"invariant-suite", invariant_suite},
        {"kde-checks", kde_checks},
        {"real-data-reproduction", real_data},
        {"api-conformance", [&] { return api_conformance(dump_dir, large_rows); }},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {Status::Fail, std::string("exception: ") + e.what()};
        }
        const char* tag = out.status == Status::Pass ? "[PASS]" : out.status == Status::Skip ? "[SKIP]" : "[FAIL]";
        std::cout << tag << ' ' << c.name << ": " << out.detail << std::endl;
        if (out.status == Status::Fail) ++failed;
    }
    return failed == 0 ? 0 : 1;
}
