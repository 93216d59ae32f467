#pragma once

// Plain-text persistence: session CSVs with a JSON manifest, feature matrices
// as CSV, masks and Pareto archives as JSON. Numbers are written in their
// shortest round-trip form, so reading a file back reproduces every double.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vitalsel/core/error.hpp"
#include "vitalsel/core/format.hpp"
#include "vitalsel/core/labels.hpp"
#include "vitalsel/features/feature_matrix.hpp"
#include "vitalsel/nsga2/mask.hpp"
#include "vitalsel/nsga2/nsga2.hpp"
#include "vitalsel/sigsynth.hpp"

namespace vitalsel::io {

namespace fs = std::filesystem;

inline std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const fs::path& path, std::string_view text)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw DataError("write failed for " + path.string());
    }
}

inline nlohmann::json read_json(const fs::path& path)
{
    try {
        return nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

inline void write_json(const fs::path& path, const nlohmann::json& j)
{
    write_text(path, j.dump(2) + "\n");
}

inline std::vector<std::string_view> split_csv_line(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') {
        out.back().remove_suffix(1);
    }
    return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text)
{
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        if (nl > start) {
            lines.push_back(text.substr(start, nl - start));
        }
        start = nl + 1;
    }
    return lines;
}

// ---- sessions ----

inline std::string session_csv(const SignalRecord& r)
{
    std::string out = "t,chest,respiration,cardiac\n";
    for (std::size_t i = 0; i < r.size(); ++i) {
        out += format_double(static_cast<double>(i) / r.sample_rate_hz);
        for (auto c : kAllChannels) {
            out += ',';
            out += format_double(r.channel(c)[i]);
        }
        out += '\n';
    }
    return out;
}

inline SignalRecord parse_session_csv(std::string_view text, const RowLabels& labels, double sample_rate_hz, std::uint64_t seed,
                                      const std::string& what)
{
    const auto lines = split_lines(text);
    if (lines.empty() || split_csv_line(lines.front()) != std::vector<std::string_view>{"t", "chest", "respiration", "cardiac"}) {
        throw DataError(what + ": expected header 't,chest,respiration,cardiac'");
    }
    SignalRecord r;
    r.labels = labels;
    r.sample_rate_hz = sample_rate_hz;
    r.seed = seed;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv_line(lines[i]);
        if (cells.size() != 4) {
            throw DataError(what + ": line " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) + " cells, expected 4");
        }
        try {
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = parse_double(cells[c + 1]);
                if (!std::isfinite(v)) {
                    throw DataError("non-finite sample");
                }
                r.channels[c].push_back(v);
            }
        } catch (const DataError& e) {
            throw DataError(what + ": line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    if (r.size() == 0) {
        throw DataError(what + ": no samples");
    }
    return r;
}

inline std::string session_file_name(const RowLabels& l)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "s%03d_%s_%s.csv", l.subject, std::string(to_string(l.activity)).c_str(),
                  std::string(to_string(l.position)).c_str());
    return buf;
}

// Writes one CSV per record under dir/sessions and dir/manifest.json.
inline void write_dataset(const fs::path& dir, const std::vector<SignalRecord>& records, const nlohmann::json& config_echo = {})
{
    nlohmann::json manifest;
    manifest["format"] = "vitalsel-sessions-1";
    if (!config_echo.is_null()) {
        manifest["config"] = config_echo;
    }
    manifest["sessions"] = nlohmann::json::array();
    for (const auto& r : records) {
        const auto name = session_file_name(r.labels);
        write_text(dir / "sessions" / name, session_csv(r));
        manifest["sessions"].push_back({{"file", "sessions/" + name},
                                        {"subject_id", r.labels.subject},
                                        {"activity", to_string(r.labels.activity)},
                                        {"position", to_string(r.labels.position)},
                                        {"sample_rate_hz", r.sample_rate_hz},
                                        {"seed", r.seed}});
    }
    write_json(dir / "manifest.json", manifest);
}

inline std::vector<SignalRecord> read_dataset(const fs::path& dir)
{
    const auto manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw DataError("no manifest.json in " + dir.string());
    }
    const auto manifest = read_json(manifest_path);
    std::vector<SignalRecord> out;
    try {
        for (const auto& s : manifest.at("sessions")) {
            const auto file = s.at("file").get<std::string>();
            RowLabels l{s.at("subject_id").get<int>(), parse_activity(s.at("activity").get<std::string>()),
                        parse_position(s.at("position").get<std::string>())};
            out.push_back(parse_session_csv(read_text(dir / file), l, s.at("sample_rate_hz").get<double>(),
                                            s.at("seed").get<std::uint64_t>(), (dir / file).string()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(manifest_path.string() + ": " + e.what());
    }
    return out;
}

// ---- feature matrices ----

inline std::string feature_csv(const FeatureMatrix& m)
{
    std::string out;
    for (const auto& n : m.names()) {
        out += n;
        out += ',';
    }
    out += "subject,activity,position\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out += format_double(m.values()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            out += ',';
        }
        const auto& l = m.labels()[i];
        out += std::to_string(l.subject);
        out += ',';
        out += to_string(l.activity);
        out += ',';
        out += to_string(l.position);
        out += '\n';
    }
    return out;
}

inline FeatureMatrix parse_feature_csv(std::string_view text, const std::string& what = "feature CSV")
{
    const auto lines = split_lines(text);
    if (lines.empty()) {
        throw DataError(what + ": empty file");
    }
    const auto header = split_csv_line(lines.front());
    if (header.size() < 4 || header[header.size() - 3] != "subject" || header[header.size() - 2] != "activity" ||
        header.back() != "position") {
        throw DataError(what + ": header must end with subject,activity,position");
    }
    const std::size_t d = header.size() - 3;
    std::vector<std::string> names(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(d));
    Eigen::MatrixXd values(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(d));
    std::vector<RowLabels> labels;
    labels.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_csv_line(lines[i]);
        if (cells.size() != header.size()) {
            throw DataError(what + ": line " + std::to_string(i + 1) + " has " + std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(header.size()));
        }
        try {
            for (std::size_t j = 0; j < d; ++j) {
                values(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) = parse_double(cells[j]);
            }
            labels.push_back({static_cast<int>(parse_double(cells[d])), parse_activity(cells[d + 1]), parse_position(cells[d + 2])});
        } catch (const DataError& e) {
            throw DataError(what + ": line " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    try {
        return FeatureMatrix(std::move(names), std::move(values), std::move(labels));
    } catch (const InvalidArgument& e) {
        throw DataError(what + ": " + e.what());
    }
}

inline void write_feature_csv(const fs::path& path, const FeatureMatrix& m)
{
    write_text(path, feature_csv(m));
}

inline FeatureMatrix read_feature_csv(const fs::path& path)
{
    return parse_feature_csv(read_text(path), path.string());
}

// ---- masks and archives ----

inline nlohmann::json mask_json(const FeatureMask& mask, const std::vector<std::string>& names)
{
    require(mask.size() == names.size(), "mask_json: mask length differs from catalog size");
    nlohmann::json features = nlohmann::json::array();
    for (auto i : mask.indices()) {
        features.push_back(names[i]);
    }
    return {{"catalog_size", names.size()}, {"count", mask.count()}, {"features", features}};
}

// Rebuilds a mask over `names` from the feature names listed in j["features"].
inline FeatureMask mask_from_json(const nlohmann::json& j, const std::vector<std::string>& names)
{
    if (!j.contains("features") || !j["features"].is_array()) {
        throw DataError("mask JSON: missing 'features' array");
    }
    FeatureMask mask(names.size());
    std::vector<std::string> unknown;
    for (const auto& f : j["features"]) {
        const auto name = f.get<std::string>();
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            unknown.push_back(name);
        } else {
            mask.set(static_cast<std::size_t>(it - names.begin()), true);
        }
    }
    if (!unknown.empty()) {
        std::string list;
        for (const auto& u : unknown) {
            list += (list.empty() ? "" : ", ") + u;
        }
        throw DataError("mask does not match the feature catalog; unknown features: " + list);
    }
    return mask;
}

inline nlohmann::json individual_json(const Individual& ind, const std::vector<std::string>& names)
{
    auto j = mask_json(ind.mask, names);
    j["objectives"] = ind.objectives;
    return j;
}

inline nlohmann::json archive_json(const ParetoArchive& archive, const std::vector<std::string>& names, ObjectiveMode mode)
{
    nlohmann::json members = nlohmann::json::array();
    for (const auto& m : archive.members()) {
        members.push_back(individual_json(m, names));
    }
    return {{"objective_mode", to_string(mode)}, {"size", archive.size()}, {"members", members}};
}

// Generation telemetry, one JSON object per line.
inline std::string telemetry_line(const GenerationStats& s, bool with_wall_time)
{
    nlohmann::json j{{"generation", s.generation}, {"best", s.best}, {"archive_size", s.archive_size}, {"evaluations", s.evaluations}};
    if (with_wall_time) {
        j["wall_seconds"] = s.wall_seconds;
    }
    return j.dump() + "\n";
}

} // namespace vitalsel::io
