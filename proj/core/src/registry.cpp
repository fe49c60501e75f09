#include "attache/registry.hpp"

#include "attache/csv.hpp"
#include "attache/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace attache {

namespace {

// Continental United States, generous margins.
constexpr double kMinLatitude = 24.0;
constexpr double kMaxLatitude = 50.0;
constexpr double kMinLongitude = -125.5;
constexpr double kMaxLongitude = -66.5;

bool is_slug(std::string_view id) {
    if (id.empty() || id.front() == '-' || id.back() == '-') return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
    });
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::InvalidRegistry, msg); }

double parse_degrees(const std::string& text, const std::string& what, std::size_t line) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        invalid("line " + std::to_string(line) + ": " + what + " '" + text + "' is not a number");
    }
    return v;
}

bool parse_bool(const std::string& text, std::size_t line) {
    std::string lower;
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "true" || lower == "1" || lower == "yes") return true;
    if (lower == "false" || lower == "0" || lower == "no" || lower.empty()) return false;
    invalid("line " + std::to_string(line) + ": inferred flag '" + text + "' is not a boolean");
}

}  // namespace

CommunityRegistry::CommunityRegistry(std::vector<Community> communities)
    : communities_(std::move(communities)) {
    std::unordered_set<std::string> seen;
    for (const auto& c : communities_) {
        if (!is_slug(c.id)) invalid("community id '" + c.id + "' is not a lowercase slug");
        if (!seen.insert(c.id).second) invalid("duplicate community id '" + c.id + "'");
        if (c.display_name.empty()) invalid("community '" + c.id + "' has no display name");
        if (c.urbanicity.empty()) invalid("community '" + c.id + "' has no urbanicity label");
        if (c.latitude < -90.0 || c.latitude > 90.0 || c.longitude < -180.0 || c.longitude > 180.0) {
            invalid("community '" + c.id + "' has coordinates outside [-90,90] x [-180,180]");
        }
        if (c.latitude < kMinLatitude || c.latitude > kMaxLatitude || c.longitude < kMinLongitude ||
            c.longitude > kMaxLongitude) {
            invalid("community '" + c.id + "' lies outside the continental United States");
        }
    }
}

std::optional<std::size_t> CommunityRegistry::index_of(std::string_view id) const noexcept {
    for (std::size_t i = 0; i < communities_.size(); ++i) {
        if (communities_[i].id == id) return i;
    }
    return std::nullopt;
}

const Community* CommunityRegistry::find(std::string_view id) const noexcept {
    auto i = index_of(id);
    return i ? &communities_[*i] : nullptr;
}

std::vector<std::string> CommunityRegistry::urbanicity_labels() const {
    std::set<std::string> labels;
    for (const auto& c : communities_) labels.insert(c.urbanicity);
    return {labels.begin(), labels.end()};
}

CommunityRegistry CommunityRegistry::with_urbanicity(
    const std::vector<std::pair<std::size_t, std::string>>& labels) const {
    auto copy = communities_;
    for (const auto& [index, label] : labels) copy.at(index).urbanicity = label;
    return CommunityRegistry(std::move(copy));
}

CommunityRegistry read_registry(std::istream& in, const RegistryLoadOptions& options) {
    static const std::vector<std::string> kColumns = {"id",       "display_name", "region", "urbanicity",
                                                      "latitude", "longitude",    "inferred"};
    // Strip comment lines before handing the text to the CSV reader.
    std::ostringstream body;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '#') {
            body << '\n';
            continue;
        }
        body << line << '\n';
    }
    std::istringstream text(body.str());
    csv::Reader reader(text);

    auto header = reader.next();
    if (!header) invalid("registry is empty");
    std::vector<std::size_t> pos(kColumns.size());
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
        auto it = std::find(header->begin(), header->end(), kColumns[k]);
        if (it == header->end()) invalid("registry header lacks column '" + kColumns[k] + "'");
        pos[k] = static_cast<std::size_t>(it - header->begin());
    }

    std::vector<Community> out;
    while (auto row = reader.next()) {
        const auto ln = reader.line();
        if (row->size() != header->size()) {
            invalid("line " + std::to_string(ln) + ": expected " + std::to_string(header->size()) +
                    " fields, got " + std::to_string(row->size()));
        }
        Community c;
        c.id = (*row)[pos[0]];
        c.display_name = (*row)[pos[1]];
        auto region = region_from_slug((*row)[pos[2]]);
        if (!region) invalid("line " + std::to_string(ln) + ": unknown region '" + (*row)[pos[2]] + "'");
        c.region = *region;
        c.urbanicity = (*row)[pos[3]];
        c.latitude = parse_degrees((*row)[pos[4]], "latitude", ln);
        c.longitude = parse_degrees((*row)[pos[5]], "longitude", ln);
        c.inferred = parse_bool((*row)[pos[6]], ln);
        out.push_back(std::move(c));
    }
    if (options.expected_count != 0 && out.size() != options.expected_count) {
        invalid("registry lists " + std::to_string(out.size()) + " communities, expected " +
                std::to_string(options.expected_count));
    }
    return CommunityRegistry(std::move(out));
}

CommunityRegistry load_registry(const std::filesystem::path& path, const RegistryLoadOptions& options) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open registry file " + path.string());
    return read_registry(in, options);
}

std::vector<std::size_t> resolve_indices(const Selection& sel, const CommunityRegistry& registry) {
    std::vector<std::size_t> out;
    const auto& cs = registry.communities();
    std::visit(
        [&](const auto& scope) {
            using T = std::decay_t<decltype(scope)>;
            if constexpr (std::is_same_v<T, CommunityScope>) {
                auto i = registry.index_of(scope.id);
                if (!i) throw Error(ErrorCode::UnknownCommunity, "unknown community '" + scope.id + "'");
                out.push_back(*i);
            } else if constexpr (std::is_same_v<T, UrbanicityScope>) {
                for (std::size_t i = 0; i < cs.size(); ++i) {
                    if (cs[i].urbanicity == scope.label) out.push_back(i);
                }
                if (out.empty()) {
                    throw Error(ErrorCode::UnknownUrbanicity, "unknown urbanicity '" + scope.label + "'");
                }
            } else if constexpr (std::is_same_v<T, RegionScope>) {
                for (std::size_t i = 0; i < cs.size(); ++i) {
                    if (cs[i].region == scope.region) out.push_back(i);
                }
            } else {
                for (std::size_t i = 0; i < cs.size(); ++i) out.push_back(i);
            }
        },
        sel.scope);
    return out;
}

std::vector<std::string> resolve_selection(const Selection& sel, const CommunityRegistry& registry) {
    std::vector<std::string> ids;
    for (auto i : resolve_indices(sel, registry)) ids.push_back(registry[i].id);
    return ids;
}

}  // namespace attache
