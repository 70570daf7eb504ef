#pragma once

#include <charconv>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"

namespace anosov {

/// Shortest round-trip decimal; nan and inf spelled out.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

struct CsvTable {
    std::string name;  // file stem
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    template <class... T>
    void add(const T&... cells) {
        rows.push_back({cell(cells)...});
    }

    static std::string cell(double v) { return format_number(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(long long v) { return std::to_string(v); }
    static std::string cell(unsigned long v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "true" : "false"; }
    static std::string cell(const std::string& v) {
        if (v.find_first_of(",\"\n") == std::string::npos) return v;
        std::string q = "\"";
        for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    static std::string cell(const char* v) { return cell(std::string(v)); }

    std::string render() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
            out += '\n';
        };
        line(header);
        for (const auto& r : rows) line(r);
        return out;
    }
};

struct RunReport {
    std::string command;
    nlohmann::json config;
    nlohmann::json results = nlohmann::json::object();
    std::vector<std::string> errors;
    std::deque<CsvTable> tables;
    std::vector<std::pair<std::string, double>> timings;  // seconds
    std::string status = "complete";
    int exit_code = 0;
    std::vector<std::string> manifest;

    CsvTable& table(std::string name, std::vector<std::string> header) {
        tables.push_back({std::move(name), std::move(header), {}});
        return tables.back();
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["command"] = command;
        j["config"] = config;
        j["results"] = results;
        j["errors"] = errors;
        j["status"] = status;
        j["exit_code"] = exit_code;
        j["manifest"] = manifest;
        return j;
    }
};

namespace detail {
inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    out << text;
    out.close();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + p.string());
}
}  // namespace detail

/// Writes one CSV per table, timings.json and report.json (with the manifest) into dir.
inline void emit_report(RunReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    report.manifest.clear();
    for (const auto& t : report.tables) {
        const std::string file = t.name + ".csv";
        detail::write_file(dir / file, t.render());
        report.manifest.push_back(file);
    }
    nlohmann::json timings = nlohmann::json::object();
    for (const auto& [k, v] : report.timings) timings[k] = v;
    detail::write_file(dir / "timings.json", timings.dump(2) + "\n");
    report.manifest.push_back("timings.json");
    detail::write_file(dir / "report.json", report.to_json().dump(2) + "\n");
}

}  // namespace anosov
