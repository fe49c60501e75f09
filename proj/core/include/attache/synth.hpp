#pragma once

#include "attache/registry.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace attache::synth {

struct Options {
    std::size_t rows = 1000;
    std::uint64_t seed = 20130801;
    /// Fraction of data rows deliberately corrupted; rounded to the nearest row.
    double malformed_fraction = 0.05;
    /// Probability that a single answer cell is blank or a sentinel code.
    double missing_rate = 0.08;
    /// Emit an urbanicity column and name it in the mapping.
    bool with_urbanicity = false;
};

struct Fixture {
    std::string csv;
    std::string mapping_json;
    /// 1-based data-row numbers of the corrupted rows, ascending.
    std::vector<std::size_t> malformed_rows;
};

/// Deterministic survey-shaped fixture over the registry's communities. Every
/// metric except civic involvement is given as raw question columns; civic
/// involvement comes as a precomputed, possibly fractional, column.
Fixture generate(const CommunityRegistry& registry, const Options& options = {});

}  // namespace attache::synth
