#include "attache/analytics.hpp"
#include "attache/error.hpp"
#include "attache/ingestion.hpp"
#include "attache/service.hpp"
#include "attache/synth.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

namespace {

using namespace attache;

#ifndef ATTACHE_DEFAULT_REGISTRY
#define ATTACHE_DEFAULT_REGISTRY "data/registry.csv"
#endif

struct Inputs {
    std::string data;
    std::string mapping;
    std::string registry = ATTACHE_DEFAULT_REGISTRY;
};

void add_inputs(CLI::App& cmd, Inputs& in) {
    cmd.add_option("--data", in.data, "Survey file (delimiter-separated, header row)")
        ->envname("ATTACHE_DATA")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--mapping", in.mapping, "Column mapping (JSON)")
        ->envname("ATTACHE_MAPPING")
        ->required()
        ->check(CLI::ExistingFile);
    cmd.add_option("--registry", in.registry, "Community registry table")
        ->envname("ATTACHE_REGISTRY")
        ->capture_default_str()
        ->check(CLI::ExistingFile);
}

ResponseTable ingest(const Inputs& in) {
    const auto registry = load_registry(in.registry);
    const auto mapping = load_mapping(in.mapping);
    return load_survey(in.data, mapping, registry);
}

std::shared_ptr<const AnalyticsSnapshot> load_snapshot(const Inputs& in) {
    const auto table = ingest(in);
    spdlog::info("ingested {}: {} accepted, {} rejected", in.data, table.provenance().accepted,
                 table.provenance().rejected);
    return std::make_shared<const AnalyticsSnapshot>(build_snapshot(table));
}

int run_serve(const Inputs& in, ServerOptions options) {
    // Block termination signals before any thread starts; a dedicated thread waits for them.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    auto store = std::make_shared<SnapshotStore>(load_snapshot(in));
    options.reload = [in] { return load_snapshot(in); };
    Server server(store, options);
    const int port = server.bind();
    spdlog::info("listening on http://{}:{}", options.host, port);

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        spdlog::info("signal {}, shutting down", sig);
        server.stop();
    });
    server.listen();
    // listen() can also return on its own (socket error); release the waiter.
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

int run_report(const Inputs& in, const std::string& kind_text, const std::string& out_path) {
    const auto kind = report_from_slug(kind_text);
    if (!kind) throw Error(ErrorCode::BadParameter, "unknown report kind '" + kind_text + "'");
    const auto snap = load_snapshot(in);
    ReportSummary summary;
    if (out_path.empty() || out_path == "-") {
        summary = write_report(*snap, *kind, std::cout);
    } else {
        std::ofstream out(out_path);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + out_path);
        summary = write_report(*snap, *kind, out);
        std::cerr << "wrote " << summary.rows << " rows to " << out_path << "\n";
    }
    std::cerr << summary.note << "\n";
    return 0;
}

int run_validate(const Inputs& in, const std::string& metric_text) {
    const auto metric = metric_from_slug(metric_text);
    if (!metric) throw Error(ErrorCode::UnknownMetric, "unknown metric '" + metric_text + "'");
    const auto table = ingest(in);
    const auto& prov = table.provenance();
    const auto& registry = table.registry();

    std::cout << "source sha256   " << prov.source_sha256 << "\n"
              << "data rows       " << prov.data_rows << "\n"
              << "accepted        " << prov.accepted << "\n"
              << "rejected        " << prov.rejected << "\n";
    for (const auto& [reason, count] : prov.rejection_reasons) {
        std::cout << "  " << reason << ": " << count << "\n";
    }

    const auto snap = build_snapshot(table);
    std::cout << "\ncommunities (" << registry.size() << ")\n";
    for (std::size_t c = 0; c < registry.size(); ++c) {
        const auto& community = registry[c];
        std::cout << "  " << community.id << "  " << slug(community.region) << (community.inferred ? " (inferred)" : "")
                  << "  [" << community.urbanicity << "]  respondents";
        for (int year : kSurveyYears) std::cout << " " << year << "=" << snap.block(c, year).rows;
        std::cout << "\n";
    }
    std::cout << "\nurbanicity labels\n";
    for (const auto& label : registry.urbanicity_labels()) std::cout << "  " << label << "\n";
    for (const auto& id : prov.urbanicity_conflicts) {
        std::cout << "  warning: conflicting urbanicity labels for " << id << "\n";
    }

    std::cout << "\n" << slug(*metric) << " by region (respondent-pooled vs community-averaged)\n";
    for (auto region : kAllRegions) {
        const auto members = resolve_selection(Selection::region(region), registry);
        if (members.empty()) continue;
        const auto bars = bar_chart_data(snap, *metric, YearFilter::all(), members.front());
        const auto& bar = bars[2];
        std::cout << "  " << slug(region) << "  pooled=" << (bar.cell ? display2(bar.cell->mean) : "NA")
                  << "  averaged="
                  << (bar.community_averaged_mean ? display2(*bar.community_averaged_mean) : "NA") << "\n";
    }
    return 0;
}

int run_generate(const synth::Options& options, const std::string& registry_path, const std::string& data_out,
                 const std::string& mapping_out) {
    const auto registry = load_registry(registry_path);
    const auto fixture = synth::generate(registry, options);
    std::ofstream data(data_out);
    std::ofstream mapping(mapping_out);
    if (!data || !mapping) throw Error(ErrorCode::Io, "cannot write fixture outputs");
    data << fixture.csv;
    mapping << fixture.mapping_json;
    std::cerr << "wrote " << options.rows << " rows (" << fixture.malformed_rows.size() << " malformed) to "
              << data_out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attache: community survey analytics engine and JSON service"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
        ->envname("ATTACHE_LOG_LEVEL")
        ->capture_default_str();

    Inputs serve_in;
    ServerOptions server;
    std::string assets;
    auto* serve = app.add_subcommand("serve", "Serve the JSON API (and optional static assets)");
    add_inputs(*serve, serve_in);
    serve->add_option("--host", server.host, "Listen address")->envname("ATTACHE_HOST")->capture_default_str();
    serve->add_option("--port", server.port, "Listen port")
        ->envname("ATTACHE_PORT")
        ->capture_default_str()
        ->check(CLI::Range(1, 65535));
    serve->add_option("--assets", assets, "Directory of static dashboard assets")
        ->envname("ATTACHE_ASSETS")
        ->check(CLI::ExistingDirectory);
    serve->add_option("--cors-origin", server.cors_origins, "Allowed CORS origin (repeatable; default any)")
        ->envname("ATTACHE_CORS_ORIGIN");
    serve->add_option("--threads", server.threads, "Worker threads")->capture_default_str();

    Inputs report_in;
    std::string kind;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Write a table as comma-separated text");
    add_inputs(*report, report_in);
    report->add_option("--kind", kind, "openness_top5, rustbelt_economy, safety_ranks, correlation_argmax")
        ->required();
    report->add_option("--out", report_out, "Output file ('-' for stdout)");

    Inputs validate_in;
    std::string diag_metric = "community_attachment";
    auto* validate = app.add_subcommand("validate", "Ingest and print provenance and registry diagnostics");
    add_inputs(*validate, validate_in);
    validate->add_option("--metric", diag_metric, "Metric for the pooling diagnostic")->capture_default_str();

    synth::Options gen;
    std::string gen_registry = ATTACHE_DEFAULT_REGISTRY;
    std::string gen_data = "synthetic.csv";
    std::string gen_mapping = "synthetic_mapping.json";
    auto* generate = app.add_subcommand("generate", "Write a seeded synthetic survey fixture and its mapping");
    generate->add_option("--rows", gen.rows)->capture_default_str();
    generate->add_option("--seed", gen.seed)->capture_default_str();
    generate->add_option("--malformed-fraction", gen.malformed_fraction)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    generate->add_flag("--with-urbanicity", gen.with_urbanicity, "Emit an urbanicity column");
    generate->add_option("--registry", gen_registry)->envname("ATTACHE_REGISTRY")->capture_default_str();
    generate->add_option("--out-data", gen_data)->capture_default_str();
    generate->add_option("--out-mapping", gen_mapping)->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*serve) {
            if (!assets.empty()) server.assets = assets;
            return run_serve(serve_in, server);
        }
        if (*report) return run_report(report_in, kind, report_out);
        if (*validate) return run_validate(validate_in, diag_metric);
        if (*generate) return run_generate(gen, gen_registry, gen_data, gen_mapping);
    } catch (const Error& e) {
        spdlog::error("{}: {}", to_string(e.code()), e.what());
        return 2;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 1;
    }
    return 0;
}
