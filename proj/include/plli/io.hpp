#ifndef PLLI_IO_HPP
#define PLLI_IO_HPP

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "plli/core.hpp"

/**
 * @file io.hpp
 * @brief CSV ingestion and the versioned JSON model file.
 */

namespace plli::io {

inline constexpr int model_format_version = 1;
inline constexpr const char* generator_name = "plli 1.0.0";

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

/// Locale-independent parse of a whole cell. Accepts "nan"/"inf" so validation can reject them.
inline double parse_double(std::string_view cell, std::size_t row, std::string_view column) {
    if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
        throw Error(ErrorKind::NonFiniteValue,
                    "row " + std::to_string(row) + ", column " + std::string(column) + ": '" + std::string(cell) +
                        "' is not a number");
    }
    return v;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/// Numeric CSV with a mandatory header row. Blank lines are skipped.
inline RawTable read_csv_stream(std::istream& in, char delimiter = ',') {
    RawTable table;
    std::string line;
    bool have_header = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line, delimiter);
        if (!have_header) {
            for (auto c : cells) table.columns.emplace_back(c);
            have_header = true;
            continue;
        }
        if (cells.size() != table.columns.size()) {
            throw Error(ErrorKind::SchemaMismatch, "data row " + std::to_string(row) + " has " +
                                                       std::to_string(cells.size()) + " cells, header has " +
                                                       std::to_string(table.columns.size()));
        }
        std::vector<double> values;
        values.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) values.push_back(parse_double(cells[c], row, table.columns[c]));
        table.rows.push_back(std::move(values));
        ++row;
    }
    if (!have_header) throw Error(ErrorKind::EmptyTable, "input has no header row");
    return table;
}

inline RawTable read_csv(const std::string& path, char delimiter = ',') {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
    return read_csv_stream(in, delimiter);
}

inline void write_csv(const std::string& path, const RawTable& table, char delimiter = ',') {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? std::string(1, delimiter) : "") << table.columns[c];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) out << (c ? std::string(1, delimiter) : "") << format_double(row[c]);
        out << '\n';
    }
    if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

/// Column index by name, or SchemaMismatch.
inline std::size_t column_index(const RawTable& table, const std::string& name) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (table.columns[c] == name) return c;
    }
    throw Error(ErrorKind::SchemaMismatch, "input has no column named '" + name + "'");
}

/// Reorders a table to `feature_names` followed by `target`, matching columns by name.
inline RawTable select_columns(const RawTable& table, const std::vector<std::string>& feature_names,
                               const std::string& target) {
    std::vector<std::size_t> picks;
    for (const auto& name : feature_names) picks.push_back(column_index(table, name));
    const std::size_t t = [&] {
        try {
            return column_index(table, target);
        } catch (const Error&) {
            throw Error(ErrorKind::MissingTargetColumn, "input has no column named '" + target + "'");
        }
    }();
    picks.push_back(t);

    RawTable out;
    for (auto p : picks) out.columns.push_back(table.columns[p]);
    out.row_ids = table.row_ids;
    out.rows.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        std::vector<double> r;
        r.reserve(picks.size());
        for (auto p : picks) r.push_back(row[p]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

using json = nlohmann::ordered_json;

inline json clip_to_json(const std::optional<Clip>& clip) {
    if (!clip) return nullptr;
    return json::array({clip->lo, clip->hi});
}

inline std::optional<Clip> clip_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return Clip{j.at(0).get<double>(), j.at(1).get<double>()};
}

inline json config_to_json(const FitConfig& cfg) {
    json j;
    j["h"] = cfg.h;
    j["w"] = cfg.w;
    j["loss"] = to_string(cfg.loss);
    j["model_family"] = to_string(cfg.model_family);
    j["clip"] = clip_to_json(cfg.clip);
    j["stride"] = cfg.stride;
    j["seed"] = cfg.seed;
    j["ridge_epsilon"] = cfg.ridge_epsilon;
    return j;
}

inline Loss loss_from_string(const std::string& s) {
    if (s == "squared") return Loss::squared;
    if (s == "absolute") return Loss::absolute;
    throw Error(ErrorKind::InvalidConfig, "unknown loss '" + s + "'");
}

inline ModelFamily family_from_string(const std::string& s) {
    if (s == "linear") return ModelFamily::linear;
    if (s == "constant") return ModelFamily::constant;
    throw Error(ErrorKind::InvalidConfig, "unknown model family '" + s + "'");
}

inline FitConfig config_from_json(const json& j) {
    FitConfig cfg;
    cfg.h = j.at("h").get<std::size_t>();
    cfg.w = j.at("w").get<std::size_t>();
    cfg.loss = loss_from_string(j.at("loss").get<std::string>());
    cfg.model_family = family_from_string(j.at("model_family").get<std::string>());
    cfg.clip = clip_from_json(j.at("clip"));
    cfg.stride = j.at("stride").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.ridge_epsilon = j.at("ridge_epsilon").get<double>();
    return cfg;
}

inline json model_to_json(const PlliModel& model) {
    json j;
    j["format_version"] = model_format_version;
    j["generator"] = generator_name;
    j["algorithm"] = model.algorithm;
    j["config"] = config_to_json(model.config);
    j["target_name"] = model.target_name;
    j["column_names"] = model.column_names;
    j["n_train"] = model.n_train;
    j["training_risk"] = model.training_risk;
    j["boundaries"] = model.boundaries;
    json intervals = json::array();
    for (const auto& interval : model.intervals) {
        json ji;
        ji["f_low"] = interval.f_low;
        ji["f_high"] = interval.f_high;
        ji["first"] = interval.first;
        ji["last"] = interval.last;
        json regions = json::array();
        for (const auto& region : interval.regions) {
            json jr;
            jr["size"] = region.size;
            jr["centroid"] = region.centroid;
            jr["feature_stddev"] = region.feature_stddev;
            jr["model"] = {
                {"kind", to_string(region.model.kind)},
                {"coefficients", region.model.coefficients},
                {"intercept", region.model.intercept},
                {"clip", clip_to_json(region.model.clip)},
            };
            regions.push_back(std::move(jr));
        }
        ji["regions"] = std::move(regions);
        intervals.push_back(std::move(ji));
    }
    j["intervals"] = std::move(intervals);
    return j;
}

inline PlliModel model_from_json(const json& j) {
    try {
        const int version = j.at("format_version").get<int>();
        if (version != model_format_version) {
            throw Error(ErrorKind::SchemaMismatch, "unsupported model format_version " + std::to_string(version));
        }
        PlliModel model;
        model.algorithm = j.at("algorithm").get<std::string>();
        model.config = config_from_json(j.at("config"));
        model.target_name = j.at("target_name").get<std::string>();
        model.column_names = j.at("column_names").get<std::vector<std::string>>();
        model.n_train = j.at("n_train").get<std::size_t>();
        model.training_risk = j.at("training_risk").get<double>();
        model.boundaries = j.at("boundaries").get<std::vector<double>>();
        for (const auto& ji : j.at("intervals")) {
            Interval interval;
            interval.f_low = ji.at("f_low").get<double>();
            interval.f_high = ji.at("f_high").get<double>();
            interval.first = ji.at("first").get<std::size_t>();
            interval.last = ji.at("last").get<std::size_t>();
            for (const auto& jr : ji.at("regions")) {
                Region region;
                region.size = jr.at("size").get<std::size_t>();
                region.centroid = jr.at("centroid").get<std::vector<double>>();
                region.feature_stddev = jr.at("feature_stddev").get<std::vector<double>>();
                const auto& jm = jr.at("model");
                region.model.kind = family_from_string(jm.at("kind").get<std::string>());
                region.model.coefficients = jm.at("coefficients").get<std::vector<double>>();
                region.model.intercept = jm.at("intercept").get<double>();
                region.model.clip = clip_from_json(jm.at("clip"));
                if (region.centroid.size() != model.column_names.size()) {
                    throw Error(ErrorKind::SchemaMismatch, "centroid dimension differs from column count");
                }
                interval.regions.push_back(std::move(region));
            }
            if (interval.regions.empty()) throw Error(ErrorKind::SchemaMismatch, "interval without regions");
            model.intervals.push_back(std::move(interval));
        }
        if (model.intervals.empty() || model.boundaries.size() + 1 != model.intervals.size()) {
            throw Error(ErrorKind::SchemaMismatch, "boundary count must be one less than interval count");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaMismatch, std::string("malformed model file: ") + e.what());
    }
}

inline std::string dump_model(const PlliModel& model) { return model_to_json(model).dump(2) + "\n"; }

inline void save_model(const std::string& path, const PlliModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
    out << dump_model(model);
    if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

inline PlliModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "' for reading");
    std::stringstream buf;
    buf << in.rdbuf();
    json j;
    try {
        j = json::parse(buf.str());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::SchemaMismatch, std::string("model file is not valid JSON: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace plli::io

#endif  // PLLI_IO_HPP
