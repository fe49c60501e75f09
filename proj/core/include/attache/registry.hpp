#pragma once

#include "attache/domain.hpp"

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace attache {

struct Community {
    std::string id;            // lowercase slug, e.g. "detroit-mi"
    std::string display_name;  // "Detroit, MI"
    RegionId region = RegionId::GreatPlains;
    std::string urbanicity;
    double latitude = 0.0;
    double longitude = 0.0;
    /// Region assignment is a default guess rather than a documented membership.
    bool inferred = false;
};

/// Immutable set of surveyed communities. Order is the load order and is used
/// wherever a stable community enumeration is needed.
class CommunityRegistry {
public:
    /// Validates ids (unique, slug-shaped), labels and coordinates.
    /// Throws Error(InvalidRegistry).
    explicit CommunityRegistry(std::vector<Community> communities);

    std::size_t size() const noexcept { return communities_.size(); }
    const std::vector<Community>& communities() const noexcept { return communities_; }
    const Community& operator[](std::size_t i) const { return communities_.at(i); }

    std::optional<std::size_t> index_of(std::string_view id) const noexcept;
    const Community* find(std::string_view id) const noexcept;

    /// Distinct urbanicity labels, sorted.
    std::vector<std::string> urbanicity_labels() const;

    /// Copy with urbanicity labels replaced for the given community indices.
    CommunityRegistry with_urbanicity(const std::vector<std::pair<std::size_t, std::string>>& labels) const;

private:
    std::vector<Community> communities_;
};

inline constexpr std::size_t kExpectedCommunityCount = 26;

struct RegistryLoadOptions {
    /// 0 disables the count check.
    std::size_t expected_count = kExpectedCommunityCount;
};

/// Reads the registry table: header `id,display_name,region,urbanicity,latitude,longitude,inferred`.
/// Lines starting with '#' are comments. Throws Error(InvalidRegistry) or Error(Io).
CommunityRegistry read_registry(std::istream& in, const RegistryLoadOptions& options = {});
CommunityRegistry load_registry(const std::filesystem::path& path,
                                const RegistryLoadOptions& options = {});

/// Community indices covered by a selection, ascending.
/// Throws UnknownCommunity / UnknownUrbanicity when the payload is absent.
std::vector<std::size_t> resolve_indices(const Selection& sel, const CommunityRegistry& registry);

/// Community ids covered by a selection, in registry order.
std::vector<std::string> resolve_selection(const Selection& sel, const CommunityRegistry& registry);

}  // namespace attache
