#include "extlab/report.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace extlab {

std::string format_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

void CsvWriter::header(const std::vector<std::string>& names) {
    begin_row();
    for (const auto& n : names) cell(n);
    end_row();
}

void CsvWriter::begin_row() {
    row_open_ = true;
    first_cell_ = true;
}

void CsvWriter::cell(double v) { cell(format_double(v)); }

void CsvWriter::cell(int v) { cell(std::to_string(v)); }

void CsvWriter::cell(const std::string& v) {
    if (!row_open_) begin_row();
    if (!first_cell_) buf_ += ',';
    first_cell_ = false;
    if (v.find_first_of(",\"\n") != std::string::npos) {
        buf_ += '"';
        for (char c : v) {
            if (c == '"') buf_ += '"';
            buf_ += c;
        }
        buf_ += '"';
    } else {
        buf_ += v;
    }
}

void CsvWriter::end_row() {
    buf_ += '\n';
    row_open_ = false;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericalError("cannot open '" + tmp.string() + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw NumericalError("short write to '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw NumericalError("cannot rename '" + tmp.string() + "' to '" + target.string() + "': " +
                             ec.message());
    }
}

Json config_to_json(const Config& cfg) {
    Json sections = Json::array();
    for (const auto& s : cfg.sections) {
        Json sec;
        sec["section"] = s.name;
        Json kv;
        for (const auto& [k, v] : s.entries) kv[k] = v;
        sec["entries"] = kv;
        sections.push_back(sec);
    }
    Json out;
    out["source"] = cfg.source_name;
    out["sections"] = sections;
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace extlab
