#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace attache::csv {

/// Delimiter-separated record reader with RFC 4180 quoting. Quoted fields may
/// contain delimiters, doubled quotes and line breaks.
class Reader {
public:
    explicit Reader(std::istream& in, char delimiter = ',') : in_(in), delimiter_(delimiter) {}

    /// Next record, or nullopt at end of input. Blank lines are skipped.
    std::optional<std::vector<std::string>> next();

    /// 1-based physical line where the last returned record started.
    std::size_t line() const noexcept { return record_line_; }

    /// True when the last record had an unterminated quote.
    bool last_record_malformed() const noexcept { return malformed_; }

private:
    std::istream& in_;
    char delimiter_;
    std::size_t line_ = 0;
    std::size_t record_line_ = 0;
    bool malformed_ = false;
};

std::string escape(const std::string& field, char delimiter = ',');

}  // namespace attache::csv
