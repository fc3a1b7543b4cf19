#pragma once

// JSON documents: circuits, class/drift specs, trained models, reports.
//
// Circuit schema:
//   {"type": "R",   "R": 100, "name": "Rs"}
//   {"type": "C",   "C": 1e-6}
//   {"type": "CPE", "Q": 2e-7, "alpha": 0.85}
//   {"type": "series" | "parallel", "children": [ ... ]}

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bevsense/circuit.hpp"
#include "bevsense/classify.hpp"
#include "bevsense/error.hpp"
#include "bevsense/features.hpp"
#include "bevsense/fit.hpp"
#include "bevsense/synthetic.hpp"

namespace bevsense {

using json = nlohmann::json;

inline constexpr int kSpecSchemaVersion = 1;
inline constexpr int kModelSchemaVersion = 1;

/// Parses JSON text; syntax errors report line and column.
inline json parse_json_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw FormatError("bad_json", source + ":" + std::to_string(line) + ":" + std::to_string(col), e.what());
    }
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("missing_file", path, "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

namespace detail {

template <typename T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw FormatError("missing_field", where, std::string("missing '") + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError("bad_field", where + "." + key, e.what());
    }
}

}  // namespace detail

inline json circuit_to_json(const CircuitModel& c) {
    json j;
    switch (c.node()) {
        case CircuitModel::Node::leaf:
            std::visit(
                [&j](const auto& el) {
                    using T = std::decay_t<decltype(el)>;
                    if constexpr (std::is_same_v<T, Resistor>) {
                        j["type"] = "R";
                        j["R"] = el.resistance;
                    } else if constexpr (std::is_same_v<T, Capacitor>) {
                        j["type"] = "C";
                        j["C"] = el.capacitance;
                    } else {
                        j["type"] = "CPE";
                        j["Q"] = el.q;
                        j["alpha"] = el.alpha;
                    }
                },
                c.element());
            if (!c.name().empty()) j["name"] = c.name();
            return j;
        case CircuitModel::Node::series:
        case CircuitModel::Node::parallel:
            j["type"] = c.node() == CircuitModel::Node::series ? "series" : "parallel";
            j["children"] = json::array();
            for (const auto& k : c.children()) j["children"].push_back(circuit_to_json(k));
            return j;
    }
    return j;
}

inline CircuitModel circuit_from_json(const json& j, const std::string& where = "circuit") {
    const auto type = detail::field<std::string>(j, "type", where);
    const std::string name = j.value("name", "");
    try {
        if (type == "R") return CircuitModel::resistor(detail::field<double>(j, "R", where), name);
        if (type == "C") return CircuitModel::capacitor(detail::field<double>(j, "C", where), name);
        if (type == "CPE")
            return CircuitModel::cpe(detail::field<double>(j, "Q", where), detail::field<double>(j, "alpha", where),
                                     name);
        if (type == "series" || type == "parallel") {
            const auto& kids = j.contains("children") ? j.at("children") : json();
            if (!kids.is_array()) throw FormatError("missing_field", where, "composition needs a 'children' array");
            std::vector<CircuitModel> children;
            for (std::size_t i = 0; i < kids.size(); ++i)
                children.push_back(circuit_from_json(kids[i], where + ".children[" + std::to_string(i) + "]"));
            return type == "series" ? CircuitModel::series(std::move(children))
                                    : CircuitModel::parallel(std::move(children));
        }
    } catch (const InvalidArgument& e) {
        throw FormatError("invalid_circuit", where, e.what());
    }
    throw FormatError("unknown_type", where + ".type", "unknown circuit element type '" + type + "'");
}

inline json class_spec_to_json(const ClassSpec& s) {
    json j;
    j["label"] = s.label;
    if (!s.description.empty()) j["description"] = s.description;
    j["jitter"] = s.param_jitter;
    j["noise"] = s.noise_relative;
    j["circuit"] = circuit_to_json(s.circuit);
    return j;
}

inline ClassSpec class_spec_from_json(const json& j, const std::string& where) {
    ClassSpec s{detail::field<std::string>(j, "label", where),
                circuit_from_json(j.contains("circuit") ? j.at("circuit") : json(), where + ".circuit"),
                j.value("jitter", 0.0), j.value("noise", 0.0), j.value("description", "")};
    if (s.param_jitter < 0.0 || s.noise_relative < 0.0)
        throw FormatError("bad_field", where, "jitter and noise must be non-negative");
    return s;
}

inline void check_spec_version(const json& j, const std::string& where) {
    if (detail::field<int>(j, "schema_version", where) != kSpecSchemaVersion)
        throw FormatError("unknown_schema_version", where + ".schema_version", "unsupported spec schema version");
}

inline json kind_specs_to_json(const std::vector<ClassSpec>& specs) {
    json j;
    j["schema_version"] = kSpecSchemaVersion;
    j["classes"] = json::array();
    for (const auto& s : specs) j["classes"].push_back(class_spec_to_json(s));
    return j;
}

inline std::vector<ClassSpec> kind_specs_from_json(const json& j, const std::string& where = "spec") {
    check_spec_version(j, where);
    if (!j.contains("classes") || !j.at("classes").is_array())
        throw FormatError("missing_field", where, "missing 'classes' array");
    std::vector<ClassSpec> out;
    for (std::size_t i = 0; i < j.at("classes").size(); ++i)
        out.push_back(class_spec_from_json(j.at("classes")[i], where + ".classes[" + std::to_string(i) + "]"));
    return out;
}

struct FreshnessBundle {
    std::vector<double> hours;
    std::vector<FreshnessSpec> beverages;
};

inline json freshness_to_json(const FreshnessBundle& b) {
    json j;
    j["schema_version"] = kSpecSchemaVersion;
    j["hours"] = b.hours;
    j["beverages"] = json::array();
    for (const auto& f : b.beverages) {
        json e = class_spec_to_json(f.base);
        e["drift"] = f.drift.rate_per_hour;
        j["beverages"].push_back(std::move(e));
    }
    return j;
}

inline FreshnessBundle freshness_from_json(const json& j, const std::string& where = "spec") {
    check_spec_version(j, where);
    FreshnessBundle b;
    b.hours = detail::field<std::vector<double>>(j, "hours", where);
    if (!j.contains("beverages") || !j.at("beverages").is_array())
        throw FormatError("missing_field", where, "missing 'beverages' array");
    for (std::size_t i = 0; i < j.at("beverages").size(); ++i) {
        const auto w = where + ".beverages[" + std::to_string(i) + "]";
        const auto& e = j.at("beverages")[i];
        FreshnessSpec f;
        f.base = class_spec_from_json(e, w);
        f.drift.rate_per_hour = e.value("drift", std::map<std::string, double>{});
        b.beverages.push_back(std::move(f));
    }
    return b;
}

inline FreshnessBundle default_freshness_bundle() { return {default_freshness_hours(), default_freshness_specs()}; }

inline json forest_hyper_to_json(const ForestHyper& h) {
    return {{"n_trees", h.n_trees},
            {"max_depth", h.max_depth},
            {"min_samples_split", h.min_samples_split},
            {"features_per_split", h.features_per_split},
            {"bootstrap", h.bootstrap},
            {"seed", h.seed}};
}

inline ForestHyper forest_hyper_from_json(const json& j) {
    ForestHyper h;
    h.n_trees = j.value("n_trees", h.n_trees);
    h.max_depth = j.value("max_depth", h.max_depth);
    h.min_samples_split = j.value("min_samples_split", h.min_samples_split);
    h.features_per_split = j.value("features_per_split", h.features_per_split);
    h.bootstrap = j.value("bootstrap", h.bootstrap);
    h.seed = j.value("seed", h.seed);
    return h;
}

inline json mlp_hyper_to_json(const MlpHyper& h) {
    return {{"hidden_layers", h.hidden_layers},
            {"learning_rate", h.learning_rate},
            {"epochs", h.epochs},
            {"batch_size", h.batch_size},
            {"seed", h.seed},
            {"optimizer", "adam(beta1=0.9, beta2=0.999, eps=1e-8)"},
            {"activation", "relu"}};
}

inline MlpHyper mlp_hyper_from_json(const json& j) {
    MlpHyper h;
    h.hidden_layers = j.value("hidden_layers", h.hidden_layers);
    h.learning_rate = j.value("learning_rate", h.learning_rate);
    h.epochs = j.value("epochs", h.epochs);
    h.batch_size = j.value("batch_size", h.batch_size);
    h.seed = j.value("seed", h.seed);
    return h;
}

inline json columns_to_json(const std::vector<ColumnMeta>& cols) {
    json a = json::array();
    for (const auto& c : cols) a.push_back({{"kind", to_string(c.kind)}, {"frequency_hz", c.frequency_hz}});
    return a;
}

inline std::vector<ColumnMeta> columns_from_json(const json& a) {
    std::vector<ColumnMeta> out;
    for (const auto& c : a)
        out.push_back({parse_feature_kind(c.at("kind").get<std::string>()), c.at("frequency_hz").get<double>()});
    return out;
}

namespace detail {

inline json tree_node_to_json(const DecisionTree& t, int i) {
    const auto& n = t.nodes[static_cast<std::size_t>(i)];
    if (n.feature < 0) return {{"class", n.leaf_class}, {"counts", n.counts}};
    return {{"feature", n.feature},
            {"threshold", n.threshold},
            {"left", tree_node_to_json(t, n.left)},
            {"right", tree_node_to_json(t, n.right)}};
}

inline int tree_node_from_json(DecisionTree& t, const json& j) {
    const int index = static_cast<int>(t.nodes.size());
    t.nodes.emplace_back();
    if (j.contains("class")) {
        t.nodes[static_cast<std::size_t>(index)].leaf_class = j.at("class").get<int>();
        t.nodes[static_cast<std::size_t>(index)].counts = j.value("counts", std::vector<int>{});
        return index;
    }
    const int feature = j.at("feature").get<int>();
    const double threshold = j.at("threshold").get<double>();
    const int l = tree_node_from_json(t, j.at("left"));
    const int r = tree_node_from_json(t, j.at("right"));
    auto& n = t.nodes[static_cast<std::size_t>(index)];
    n.feature = feature;
    n.threshold = threshold;
    n.left = l;
    n.right = r;
    return index;
}

}  // namespace detail

inline json model_to_json(const TrainedModel& m) {
    json j;
    j["format"] = "bevsense-model";
    j["schema_version"] = kModelSchemaVersion;
    j["classes"] = m.classes;
    j["columns"] = columns_to_json(m.columns);
    if (m.stats.empty()) j["standardization"] = nullptr;
    else j["standardization"] = {{"mean", m.stats.mean}, {"stddev", m.stats.stddev}};
    if (const auto* f = std::get_if<ForestModel>(&m.model)) {
        j["kind"] = "forest";
        j["hyper"] = forest_hyper_to_json(f->forest.hyper);
        j["n_features"] = f->forest.n_features;
        j["trees"] = json::array();
        for (const auto& t : f->forest.trees) j["trees"].push_back(detail::tree_node_to_json(t, 0));
    } else {
        const auto& mm = std::get<MlpModel>(m.model);
        j["kind"] = "mlp";
        j["hyper"] = mlp_hyper_to_json(mm.hyper);
        j["layers"] = json::array();
        for (const auto& l : mm.network.layers) {
            json rows = json::array();
            for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
                std::vector<double> row(static_cast<std::size_t>(l.weights.cols()));
                for (Eigen::Index c = 0; c < l.weights.cols(); ++c) row[static_cast<std::size_t>(c)] = l.weights(r, c);
                rows.push_back(row);
            }
            j["layers"].push_back({{"weights", rows}, {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
        }
    }
    return j;
}

inline TrainedModel model_from_json(const json& j) {
    if (j.value("format", "") != "bevsense-model") throw FormatError("bad_model", "model.format", "not a model document");
    if (j.value("schema_version", 0) != kModelSchemaVersion)
        throw FormatError("unknown_schema_version", "model.schema_version", "unsupported model schema version");
    try {
        TrainedModel m;
        m.classes = j.at("classes").get<std::vector<std::string>>();
        m.columns = columns_from_json(j.at("columns"));
        if (!j.at("standardization").is_null()) {
            m.stats.mean = j.at("standardization").at("mean").get<std::vector<double>>();
            m.stats.stddev = j.at("standardization").at("stddev").get<std::vector<double>>();
        }
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "forest") {
            ForestModel fm;
            fm.forest.hyper = forest_hyper_from_json(j.at("hyper"));
            fm.forest.n_classes = static_cast<int>(m.classes.size());
            fm.forest.n_features = j.at("n_features").get<int>();
            for (const auto& t : j.at("trees")) {
                DecisionTree tree;
                detail::tree_node_from_json(tree, t);
                fm.forest.trees.push_back(std::move(tree));
            }
            m.model = std::move(fm);
        } else if (kind == "mlp") {
            MlpModel mm;
            mm.hyper = mlp_hyper_from_json(j.at("hyper"));
            for (const auto& l : j.at("layers")) {
                const auto rows = l.at("weights").get<std::vector<std::vector<double>>>();
                const auto bias = l.at("bias").get<std::vector<double>>();
                DenseLayer layer;
                layer.weights.resize(static_cast<Eigen::Index>(rows.size()),
                                     rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
                for (std::size_t r = 0; r < rows.size(); ++r)
                    for (std::size_t c = 0; c < rows[r].size(); ++c)
                        layer.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
                layer.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
                mm.network.layers.push_back(std::move(layer));
            }
            m.model = std::move(mm);
        } else {
            throw FormatError("bad_model", "model.kind", "unknown model kind '" + kind + "'");
        }
        return m;
    } catch (const json::exception& e) {
        throw FormatError("bad_model", "model", e.what());
    }
}

inline json eval_report_to_json(const EvalReport& r) {
    return {{"classes", r.classes},   {"accuracy", r.accuracy}, {"total", r.total},
            {"confusion", r.confusion}, {"precision", r.precision}, {"recall", r.recall}};
}

inline json fit_result_to_json(const FitResult& r, const FitProblem& prob) {
    const auto info = prob.circuit.parameter_info();
    json names = json::array();
    for (auto k : prob.free) names.push_back(info[k].name);
    json j{{"parameters", names},
           {"values", r.params},
           {"cost", r.cost},
           {"iterations", r.iterations},
           {"converged", r.converged},
           {"cost_history", r.cost_history},
           {"weighting", prob.weighting == Weighting::unit ? "unit" : "proportional"}};
    if (r.covariance_diag) j["covariance_diag"] = *r.covariance_diag;
    else j["covariance_diag"] = nullptr;
    return j;
}

inline json profile_to_json(const ImportanceProfile& p) {
    return {{"kind", to_string(p.kind)},
            {"frequencies_hz", p.frequencies},
            {"weights", p.weights},
            {"peak_frequency_hz", p.peak_frequency}};
}

inline ImportanceProfile profile_from_json(const json& j) {
    ImportanceProfile p;
    p.kind = parse_feature_kind(j.at("kind").get<std::string>());
    p.frequencies = j.at("frequencies_hz").get<std::vector<double>>();
    p.weights = j.at("weights").get<std::vector<double>>();
    p.peak_frequency = j.at("peak_frequency_hz").get<double>();
    return p;
}

}  // namespace bevsense
