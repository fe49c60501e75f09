#include "attache/ingestion.hpp"

#include "attache/csv.hpp"
#include "attache/error.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

namespace attache {

using nlohmann::json;

namespace {

[[noreturn]] void bad_mapping(const std::string& msg) { throw Error(ErrorCode::InvalidMapping, msg); }

std::string require_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string() || it->get<std::string>().empty()) {
        bad_mapping(std::string("mapping field '") + key + "' must be a non-empty string");
    }
    return it->get<std::string>();
}

Scale parse_scale(const json& j, const Scale& metric_scale, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        bad_mapping(where + ": scale must be a [min, max] pair");
    }
    Scale s{j[0].get<double>(), j[1].get<double>()};
    if (!(s.min < s.max)) bad_mapping(where + ": scale min must be below max");
    if (s.min < metric_scale.min || s.max > metric_scale.max) {
        bad_mapping(where + ": question scale must lie within the metric scale");
    }
    return s;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_number(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

// Outcome of reading one cell.
enum class CellStatus { Ok, Unparseable, OutOfScale };

struct Cell {
    CellStatus status = CellStatus::Ok;
    std::optional<double> value;
};

class RowRejected : public std::exception {
public:
    explicit RowRejected(const char* reason) : reason_(reason) {}
    const char* reason() const noexcept { return reason_; }

private:
    const char* reason_;
};

// Resolved column positions for one metric.
struct MetricPlan {
    std::optional<std::size_t> precomputed;
    std::vector<std::size_t> questions;
    MetricDefinition definition;
};

}  // namespace

// ---------------------------------------------------------------------------

ColumnMapping parse_mapping(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        bad_mapping(std::string("mapping is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) bad_mapping("mapping must be a JSON object");

    ColumnMapping m;
    m.community_column = require_string(doc, "community_column");
    m.year_column = require_string(doc, "year_column");
    if (doc.contains("urbanicity_column") && !doc["urbanicity_column"].is_null()) {
        m.urbanicity_column = require_string(doc, "urbanicity_column");
    }
    if (doc.contains("delimiter")) {
        auto d = require_string(doc, "delimiter");
        if (d == "\\t") d = "\t";
        if (d.size() != 1 || d[0] == '"' || d[0] == '\n') bad_mapping("delimiter must be one character");
        m.delimiter = d[0];
    }
    if (doc.contains("missing_values")) {
        const auto& mv = doc["missing_values"];
        if (!mv.is_array()) bad_mapping("missing_values must be an array of strings");
        m.missing_values.clear();
        for (const auto& v : mv) {
            if (!v.is_string()) bad_mapping("missing_values must be an array of strings");
            m.missing_values.push_back(v.get<std::string>());
        }
    }
    if (doc.contains("community_codes")) {
        const auto& cc = doc["community_codes"];
        if (!cc.is_object()) bad_mapping("community_codes must map raw values to community ids");
        for (const auto& [raw, id] : cc.items()) {
            if (!id.is_string()) bad_mapping("community_codes['" + raw + "'] must be a community id");
            m.community_codes.emplace(raw, id.get<std::string>());
        }
    }
    if (doc.contains("year_codes")) {
        const auto& yc = doc["year_codes"];
        if (!yc.is_object()) bad_mapping("year_codes must map raw values to survey years");
        for (const auto& [raw, year] : yc.items()) {
            if (!year.is_number_integer() || !is_survey_year(year.get<int>())) {
                bad_mapping("year_codes['" + raw + "'] must be 2008, 2009 or 2010");
            }
            m.year_codes.emplace(raw, year.get<int>());
        }
    }

    auto metrics = doc.find("metrics");
    if (metrics == doc.end() || !metrics->is_object()) bad_mapping("mapping needs a 'metrics' object");
    std::array<bool, kMetricCount> mapped{};
    for (const auto& [key, spec] : metrics->items()) {
        auto id = metric_from_slug(key);
        if (!id) bad_mapping("unknown metric '" + key + "' in mapping");
        if (!spec.is_object()) bad_mapping("metrics['" + key + "'] must be an object");
        const bool has_questions = spec.contains("questions");
        const bool has_column = spec.contains("column");
        if (has_questions == has_column) {
            bad_mapping("metrics['" + key + "'] needs exactly one of 'questions' or 'column'");
        }
        const auto& def = metric_definition(*id);
        if (has_column) {
            m.metrics[index_of(*id)] = require_string(spec, "column");
        } else {
            const auto& qs = spec["questions"];
            if (!qs.is_array() || qs.size() < 2 || qs.size() > 6) {
                bad_mapping("metrics['" + key + "'].questions must list 2 to 6 questions");
            }
            std::vector<QuestionColumn> columns;
            for (std::size_t i = 0; i < qs.size(); ++i) {
                const auto where = "metrics['" + key + "'].questions[" + std::to_string(i) + "]";
                QuestionColumn q;
                if (qs[i].is_string()) {
                    q.column = qs[i].get<std::string>();
                    q.scale = def.scale;
                } else if (qs[i].is_object()) {
                    q.column = require_string(qs[i], "column");
                    q.scale = qs[i].contains("scale") ? parse_scale(qs[i]["scale"], def.scale, where) : def.scale;
                    if (qs[i].contains("recode")) {
                        const auto& rc = qs[i]["recode"];
                        if (!rc.is_object()) bad_mapping(where + ": recode must be an object");
                        for (const auto& [raw, v] : rc.items()) {
                            if (v.is_null()) {
                                q.recode.emplace(raw, std::nullopt);
                            } else if (v.is_number()) {
                                q.recode.emplace(raw, v.get<double>());
                            } else {
                                bad_mapping(where + ": recode values must be numbers or null");
                            }
                        }
                    }
                } else {
                    bad_mapping(where + " must be a column name or an object");
                }
                if (q.column.empty()) bad_mapping(where + ": empty column name");
                columns.push_back(std::move(q));
            }
            m.metrics[index_of(*id)] = std::move(columns);
        }
        mapped[index_of(*id)] = true;
    }
    for (auto metric : kAllMetrics) {
        if (!mapped[index_of(metric)]) bad_mapping("metric '" + std::string(slug(metric)) + "' is not mapped");
    }
    return m;
}

ColumnMapping load_mapping(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open mapping file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_mapping(text);
}

// ---------------------------------------------------------------------------

std::optional<double> derive_metric(std::span<const std::optional<double>> answers,
                                    const MetricDefinition& def) {
    const std::size_t k = def.component_questions.size();
    if (answers.size() != k) {
        throw Error(ErrorCode::BadParameter, "metric '" + std::string(slug(def.id)) + "' expects " +
                                                 std::to_string(k) + " answers, got " +
                                                 std::to_string(answers.size()));
    }
    double sum = 0.0;
    std::size_t answered = 0;
    for (const auto& a : answers) {
        if (!a) continue;
        if (!def.scale.contains(*a)) {
            throw Error(ErrorCode::ScaleViolation, "answer " + std::to_string(*a) + " outside the scale of '" +
                                                       std::string(slug(def.id)) + "'");
        }
        sum += *a;
        ++answered;
    }
    if (answered == 0 || answered < (k + 1) / 2) return std::nullopt;
    // Clamp guards the last ulp of rounding on the division.
    return std::clamp(sum / static_cast<double>(answered), def.scale.min, def.scale.max);
}

// ---------------------------------------------------------------------------

ResponseTable::ResponseTable(std::vector<SurveyResponse> responses,
                             std::shared_ptr<const CommunityRegistry> registry, Provenance provenance)
    : responses_(std::move(responses)), registry_(std::move(registry)), provenance_(std::move(provenance)) {
    for (const auto& r : responses_) {
        if (r.community >= registry_->size()) {
            throw Error(ErrorCode::UnknownCommunity, "response references a community outside the registry");
        }
        if (!is_survey_year(r.year)) {
            throw Error(ErrorCode::BadParameter, "response year " + std::to_string(r.year) + " is not a survey year");
        }
    }
}

ResponseTable parse_survey(std::istream& in, const ColumnMapping& mapping, const CommunityRegistry& registry) {
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::istringstream text(bytes);
    csv::Reader reader(text, mapping.delimiter);

    auto header = reader.next();
    if (!header) throw Error(ErrorCode::EmptyInput, "survey file has no header row");
    std::unordered_map<std::string, std::size_t> column_pos;
    for (std::size_t i = 0; i < header->size(); ++i) {
        column_pos.emplace(std::string(trim((*header)[i])), i);
    }
    auto position = [&](const std::string& name) {
        auto it = column_pos.find(name);
        if (it == column_pos.end()) throw Error(ErrorCode::MissingColumn, "survey file has no column '" + name + "'");
        return it->second;
    };

    const std::size_t community_col = position(mapping.community_column);
    const std::size_t year_col = position(mapping.year_column);
    std::optional<std::size_t> urbanicity_col;
    if (mapping.urbanicity_column) urbanicity_col = position(*mapping.urbanicity_column);

    for (const auto& [raw, id] : mapping.community_codes) {
        if (!registry.index_of(id)) {
            throw Error(ErrorCode::InvalidMapping, "community_codes['" + raw + "'] names unknown community '" + id + "'");
        }
    }

    std::array<MetricPlan, kMetricCount> plans;
    for (auto metric : kAllMetrics) {
        auto& plan = plans[index_of(metric)];
        plan.definition = metric_definition(metric);
        const auto& source = mapping.source(metric);
        if (const auto* column = std::get_if<std::string>(&source)) {
            plan.precomputed = position(*column);
        } else {
            const auto& qs = std::get<std::vector<QuestionColumn>>(source);
            plan.definition.component_questions.clear();
            for (const auto& q : qs) {
                plan.questions.push_back(position(q.column));
                plan.definition.component_questions.push_back(q.column);
            }
        }
    }

    auto is_missing = [&](std::string_view cell) {
        return std::find(mapping.missing_values.begin(), mapping.missing_values.end(), cell) !=
               mapping.missing_values.end();
    };

    auto read_cell = [&](std::string_view raw, const Scale& scale,
                         const std::map<std::string, std::optional<double>, std::less<>>* recode) -> Cell {
        const auto cell = trim(raw);
        if (is_missing(cell)) return {};
        std::optional<double> value;
        if (recode) {
            if (auto it = recode->find(cell); it != recode->end()) {
                if (!it->second) return {};
                value = it->second;
            }
        }
        if (!value) value = parse_number(cell);
        if (!value) return {CellStatus::Unparseable, std::nullopt};
        if (!scale.contains(*value)) return {CellStatus::OutOfScale, std::nullopt};
        return {CellStatus::Ok, value};
    };

    auto require = [](const Cell& c) -> std::optional<double> {
        if (c.status == CellStatus::Unparseable) throw RowRejected("unparseable_value");
        if (c.status == CellStatus::OutOfScale) throw RowRejected("scale_violation");
        return c.value;
    };

    std::vector<SurveyResponse> responses;
    Provenance prov;
    prov.source_sha256 = sha256_hex(bytes);
    std::vector<std::map<std::string, std::size_t>> urbanicity_votes(registry.size());
    std::vector<std::optional<double>> answers;

    while (auto row = reader.next()) {
        ++prov.data_rows;
        try {
            if (reader.last_record_malformed()) throw RowRejected("unterminated_quote");
            if (row->size() != header->size()) throw RowRejected("field_count");

            SurveyResponse r;
            const auto community_cell = trim((*row)[community_col]);
            std::optional<std::size_t> community;
            if (auto it = mapping.community_codes.find(community_cell); it != mapping.community_codes.end()) {
                community = registry.index_of(it->second);
            } else {
                community = registry.index_of(slugify(community_cell));
            }
            if (!community) throw RowRejected("unknown_community");
            r.community = *community;

            const auto year_cell = trim((*row)[year_col]);
            std::optional<int> year;
            if (auto it = mapping.year_codes.find(year_cell); it != mapping.year_codes.end()) {
                year = it->second;
            } else if (auto v = parse_number(year_cell); v && *v == std::floor(*v)) {
                year = static_cast<int>(*v);
            }
            if (!year || !is_survey_year(*year)) throw RowRejected("unknown_year");
            r.year = *year;

            for (auto metric : kAllMetrics) {
                const auto& plan = plans[index_of(metric)];
                auto& slot = r.metrics[index_of(metric)];
                if (plan.precomputed) {
                    slot = require(read_cell((*row)[*plan.precomputed], plan.definition.scale, nullptr));
                    continue;
                }
                const auto& qs = std::get<std::vector<QuestionColumn>>(mapping.source(metric));
                answers.clear();
                for (std::size_t q = 0; q < qs.size(); ++q) {
                    answers.push_back(require(read_cell((*row)[plan.questions[q]], qs[q].scale, &qs[q].recode)));
                }
                slot = derive_metric(answers, plan.definition);
            }

            if (urbanicity_col) {
                const auto label = trim((*row)[*urbanicity_col]);
                if (!is_missing(label)) ++urbanicity_votes[r.community][std::string(label)];
            }
            responses.push_back(r);
            ++prov.accepted;
        } catch (const RowRejected& e) {
            ++prov.rejected;
            ++prov.rejection_reasons[e.reason()];
            prov.rejected_rows.push_back(prov.data_rows);
        }
    }
    if (prov.data_rows == 0) throw Error(ErrorCode::EmptyInput, "survey file has no data rows");

    std::shared_ptr<const CommunityRegistry> reg;
    if (urbanicity_col) {
        std::vector<std::pair<std::size_t, std::string>> labels;
        for (std::size_t c = 0; c < urbanicity_votes.size(); ++c) {
            const auto& votes = urbanicity_votes[c];
            if (votes.empty()) continue;
            auto best = std::max_element(votes.begin(), votes.end(),
                                         [](const auto& a, const auto& b) { return a.second < b.second; });
            if (votes.size() > 1) prov.urbanicity_conflicts.push_back(registry[c].id);
            labels.emplace_back(c, best->first);
        }
        reg = std::make_shared<const CommunityRegistry>(registry.with_urbanicity(labels));
    } else {
        reg = std::make_shared<const CommunityRegistry>(registry);
    }
    return ResponseTable(std::move(responses), std::move(reg), std::move(prov));
}

ResponseTable load_survey(const std::filesystem::path& path, const ColumnMapping& mapping,
                          const CommunityRegistry& registry) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open survey file " + path.string());
    return parse_survey(in, mapping, registry);
}

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::Io, "SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xF]);
    }
    return out;
}

}  // namespace attache
