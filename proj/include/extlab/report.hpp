#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "extlab/config.hpp"

namespace extlab {

using Json = nlohmann::ordered_json;

// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

// Simple RFC-4180-style CSV accumulator: numeric cells unquoted, text cells
// quoted only when needed, LF line endings.
class CsvWriter {
public:
    void header(const std::vector<std::string>& names);
    void begin_row();
    void cell(double v);
    void cell(int v);
    void cell(const std::string& v);
    void end_row();
    const std::string& str() const { return buf_; }

private:
    std::string buf_;
    bool row_open_ = false;
    bool first_cell_ = true;
};

// Writes to <path>.tmp in the same directory, then renames: either the old
// content or the complete new content is visible, never a partial file.
void atomic_write_file(const std::string& path, const std::string& content);

// Resolved-config provenance block embedded in every JSON report.
Json config_to_json(const Config& cfg);

std::string read_file(const std::string& path);

}  // namespace extlab
