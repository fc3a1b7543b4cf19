#pragma once

// Dataset files: a CSV of Cartesian impedance values plus a sibling JSON
// manifest describing the grid, the bundled label registry, and validation.
//
//   label,sample_id,re_0,im_0,...,re_{n-1},im_{n-1}
//
// Numbers use the shortest decimal that round-trips to the same double.

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <nlohmann/json.hpp>

#include "bevsense/dataset.hpp"
#include "bevsense/error.hpp"
#include "bevsense/synthetic.hpp"

namespace bevsense {

inline constexpr int kDatasetSchemaVersion = 1;

inline std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

namespace detail {

inline std::string csv_quote(std::string_view s) {
    if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

/// Splits one CSV record; handles quoted fields (no embedded newlines).
inline std::vector<std::string> csv_split(std::string_view line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

inline std::string cell_where(std::size_t line, std::size_t col) {
    return "line " + std::to_string(line) + ", column " + std::to_string(col + 1);
}

inline double parse_cell(const std::string& s, std::size_t line, std::size_t col) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw FormatError("non_numeric", cell_where(line, col), "cannot parse '" + s + "' as a number");
    if (!std::isfinite(v)) throw FormatError("non_finite", cell_where(line, col), "value is NaN or infinite");
    return v;
}

}  // namespace detail

/// `data.csv` -> `data.manifest.json`.
inline std::filesystem::path manifest_path_for(const std::filesystem::path& csv) {
    auto p = csv;
    p.replace_extension(".manifest.json");
    return p;
}

inline nlohmann::json grid_to_json(const FrequencyGrid& g) {
    nlohmann::json j;
    j["spacing"] = g.spacing() == GridSpacing::logarithmic ? "logarithmic" : "explicit";
    j["f_min"] = g.front();
    j["f_max"] = g.back();
    j["n"] = g.size();
    j["points"] = g.points();
    return j;
}

inline FrequencyGrid grid_from_json(const nlohmann::json& j) {
    const std::string spacing = j.value("spacing", "explicit");
    if (j.contains("points")) {
        auto pts = j.at("points").get<std::vector<double>>();
        if (j.contains("n") && j.at("n").get<std::size_t>() != pts.size())
            throw FormatError("grid_mismatch", "manifest.grid", "n disagrees with the number of points");
        return FrequencyGrid::from_points(std::move(pts), spacing == "logarithmic" ? GridSpacing::logarithmic
                                                                                   : GridSpacing::explicit_points);
    }
    if (spacing != "logarithmic") throw FormatError("grid_mismatch", "manifest.grid", "explicit grid without points");
    return make_log_grid(j.at("f_min").get<double>(), j.at("f_max").get<double>(), j.at("n").get<std::size_t>());
}

inline nlohmann::json dataset_manifest(const Dataset& d, const std::string& registry = "builtin") {
    nlohmann::json m;
    m["format"] = "bevsense-dataset";
    m["schema_version"] = kDatasetSchemaVersion;
    m["grid"] = grid_to_json(d.grid());
    m["stimulus_amplitude_mV"] = d.stimulus_amplitude_mv;
    m["storage"] = "cartesian";
    m["columns"] = "label,sample_id,re_i,im_i";
    m["registry"] = registry;
    m["observations"] = d.size();
    return m;
}

inline void write_dataset_csv(std::ostream& out, const Dataset& d) {
    if (d.empty()) throw InvalidArgument("cannot write a dataset with no observations");
    const std::size_t n = d.grid().size();
    out << "label,sample_id";
    for (std::size_t i = 0; i < n; ++i) out << ",re_" << i << ",im_" << i;
    out << '\n';
    for (const auto& o : d.observations) {
        out << detail::csv_quote(o.label) << ',' << o.sample_id;
        for (const auto& z : o.spectrum.values()) out << ',' << format_double(z.real) << ',' << format_double(z.imag);
        out << '\n';
    }
}

inline Dataset read_dataset_csv(std::istream& in, const nlohmann::json& manifest) {
    if (!manifest.contains("schema_version") || !manifest.at("schema_version").is_number_integer() ||
        manifest.at("schema_version").get<int>() != kDatasetSchemaVersion)
        throw FormatError("unknown_schema_version", "manifest.schema_version",
                          "expected schema_version " + std::to_string(kDatasetSchemaVersion));
    if (manifest.value("storage", "cartesian") != "cartesian")
        throw FormatError("unsupported_storage", "manifest.storage", "only cartesian storage is supported");
    FrequencyGrid grid;
    try {
        grid = grid_from_json(manifest.at("grid"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad_manifest", "manifest.grid", e.what());
    } catch (const InvalidArgument& e) {
        throw FormatError("bad_manifest", "manifest.grid", e.what());
    }
    const std::size_t n = grid.size();
    const std::size_t expected_cols = 2 + 2 * n;

    Dataset d;
    d.stimulus_amplitude_mv = manifest.value("stimulus_amplitude_mV", kDefaultStimulusMv);
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw FormatError("bad_header", "line 1", "missing CSV header");
    ++line_no;
    const auto header = detail::csv_split(line);
    if (header.size() != expected_cols)
        throw FormatError("column_count", "line 1",
                          "header has " + std::to_string(header.size()) + " columns, manifest grid implies " +
                              std::to_string(expected_cols));
    if (header[0] != "label" || header[1] != "sample_id")
        throw FormatError("bad_header", "line 1", "header must start with label,sample_id");
    for (std::size_t i = 0; i < n; ++i)
        if (header[2 + 2 * i] != "re_" + std::to_string(i) || header[3 + 2 * i] != "im_" + std::to_string(i))
            throw FormatError("bad_header", detail::cell_where(1, 2 + 2 * i), "unexpected column name");

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = detail::csv_split(line);
        if (cells.size() != expected_cols)
            throw FormatError("column_count", "line " + std::to_string(line_no),
                              "row has " + std::to_string(cells.size()) + " columns, expected " +
                                  std::to_string(expected_cols));
        std::uint64_t sid = 0;
        const auto& s = cells[1];
        const auto r = std::from_chars(s.data(), s.data() + s.size(), sid);
        if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size())
            throw FormatError("non_numeric", detail::cell_where(line_no, 1), "sample_id '" + s + "' is not an integer");
        std::vector<ComplexImpedance> values;
        values.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            values.emplace_back(detail::parse_cell(cells[2 + 2 * i], line_no, 2 + 2 * i),
                                detail::parse_cell(cells[3 + 2 * i], line_no, 3 + 2 * i));
        SpectrumMeta meta;
        meta.stimulus_amplitude_mv = d.stimulus_amplitude_mv;
        meta.label = cells[0];
        d.observations.push_back({cells[0], sid, Spectrum(grid, std::move(values), std::move(meta))});
    }
    if (manifest.contains("observations") && manifest.at("observations").get<std::size_t>() != d.size())
        throw FormatError("row_count", "line " + std::to_string(line_no),
                          "manifest declares " + std::to_string(manifest.at("observations").get<std::size_t>()) +
                              " observations, CSV has " + std::to_string(d.size()));
    return d;
}

inline void write_dataset(const Dataset& d, const std::filesystem::path& csv_path,
                          const std::string& registry = "builtin") {
    if (d.empty()) throw InvalidArgument("cannot write a dataset with no observations");
    {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw Error("cannot open " + csv_path.string() + " for writing");
        write_dataset_csv(out, d);
    }
    std::ofstream m(manifest_path_for(csv_path), std::ios::binary);
    if (!m) throw Error("cannot open " + manifest_path_for(csv_path).string() + " for writing");
    m << dataset_manifest(d, registry).dump(2) << '\n';
}

inline Dataset read_dataset(const std::filesystem::path& csv_path) {
    const auto mpath = manifest_path_for(csv_path);
    std::ifstream m(mpath, std::ios::binary);
    if (!m) throw FormatError("missing_manifest", mpath.string(), "manifest file not found");
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(m);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("bad_manifest", mpath.string() + " byte " + std::to_string(e.byte), e.what());
    }
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw FormatError("missing_csv", csv_path.string(), "dataset CSV not found");
    return read_dataset_csv(in, manifest);
}

/// Contiguous id -> name map; the id is the index.
struct LabelRegistry {
    std::vector<std::string> names;

    std::size_t size() const noexcept { return names.size(); }
    const std::string& name(std::size_t id) const { return names.at(id); }

    /// A label is known if it is a registry id written in decimal, or a registry name.
    bool knows(const std::string& label) const {
        std::size_t id = 0;
        const auto r = std::from_chars(label.data(), label.data() + label.size(), id);
        if (!label.empty() && r.ec == std::errc() && r.ptr == label.data() + label.size()) return id < names.size();
        return std::find(names.begin(), names.end(), label) != names.end();
    }
};

inline LabelRegistry builtin_label_registry() {
    const auto& n = beverage_names();
    return {std::vector<std::string>(n.begin(), n.end())};
}

/// Parses {"0": "Mineral water", "1": ...}. Rejects duplicate ids/names and gaps.
inline LabelRegistry parse_label_registry(const std::string& text, const std::string& source = "registry") {
    std::vector<std::string> keys;
    nlohmann::json::parser_callback_t cb = [&keys](int depth, nlohmann::json::parse_event_t ev,
                                                   nlohmann::json& parsed) {
        if (ev == nlohmann::json::parse_event_t::key && depth == 1) keys.push_back(parsed.get<std::string>());
        return true;
    };
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, cb);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("bad_json", source + " byte " + std::to_string(e.byte), e.what());
    }
    if (!j.is_object()) throw FormatError("bad_registry", source, "registry must be a JSON object of id -> name");
    std::map<std::size_t, std::string> by_id;
    std::set<std::string> names;
    for (const auto& k : keys) {
        std::size_t id = 0;
        const auto r = std::from_chars(k.data(), k.data() + k.size(), id);
        if (k.empty() || r.ec != std::errc() || r.ptr != k.data() + k.size())
            throw FormatError("bad_registry", source + "[" + k + "]", "registry key is not a non-negative integer");
        if (by_id.contains(id)) throw FormatError("duplicate_id", source + "[" + k + "]", "duplicate registry id");
        const auto& v = j.at(k);
        if (!v.is_string()) throw FormatError("bad_registry", source + "[" + k + "]", "registry name must be a string");
        const auto name = v.get<std::string>();
        if (!names.insert(name).second)
            throw FormatError("duplicate_name", source + "[" + k + "]", "duplicate registry name '" + name + "'");
        by_id[id] = name;
    }
    LabelRegistry reg;
    std::size_t expect = 0;
    for (const auto& [id, name] : by_id) {
        if (id != expect)
            throw FormatError("id_gap", source, "registry ids are not contiguous: missing id " + std::to_string(expect));
        reg.names.push_back(name);
        ++expect;
    }
    return reg;
}

/// "builtin" (or empty) selects the bundled 20-beverage registry; anything else is a file path.
inline LabelRegistry load_label_registry(const std::string& path_or_builtin = "builtin") {
    if (path_or_builtin.empty() || path_or_builtin == "builtin") return builtin_label_registry();
    std::ifstream in(path_or_builtin, std::ios::binary);
    if (!in) throw FormatError("missing_registry", path_or_builtin, "registry file not found");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_label_registry(ss.str(), path_or_builtin);
}

struct Finding {
    std::string code;  // unknown_label | grid_mismatch | class_imbalance | duplicate_sample_id | empty
    std::string message;
};

struct ValidationReport {
    std::vector<Finding> findings;
    std::map<std::string, std::size_t> per_class_counts;

    bool clean() const noexcept { return findings.empty(); }
    bool has(const std::string& code) const {
        return std::any_of(findings.begin(), findings.end(), [&](const Finding& f) { return f.code == code; });
    }
};

/// Report-only checks. Pass nullptr to skip the label check (e.g. freshness datasets).
inline ValidationReport validate_dataset(const Dataset& d, const LabelRegistry* registry) {
    ValidationReport r;
    if (d.empty()) {
        r.findings.push_back({"empty", "dataset has no observations"});
        return r;
    }
    const FrequencyGrid& g0 = d.observations.front().spectrum.grid();
    std::set<std::uint64_t> ids;
    std::set<std::string> reported_labels;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& o = d.observations[i];
        ++r.per_class_counts[o.label];
        if (registry && !registry->knows(o.label) && reported_labels.insert(o.label).second)
            r.findings.push_back({"unknown_label", "label '" + o.label + "' is not in the registry"});
        if (!(o.spectrum.grid() == g0))
            r.findings.push_back({"grid_mismatch", "observation " + std::to_string(i) + " uses a different grid"});
        if (!ids.insert(o.sample_id).second)
            r.findings.push_back({"duplicate_sample_id", "sample_id " + std::to_string(o.sample_id) + " repeats"});
    }
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& [label, n] : r.per_class_counts) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }
    if (lo != hi)
        r.findings.push_back({"class_imbalance", "observations per class range from " + std::to_string(lo) + " to " +
                                                     std::to_string(hi)});
    return r;
}

}  // namespace bevsense
