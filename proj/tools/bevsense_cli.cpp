// bevsense-cli: simulate, fit, analyze, classify and replay impedance sweeps.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bevsense/bevsense.hpp"

namespace fs = std::filesystem;
using namespace bevsense;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct Globals {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::string format = "json";
};

// Carries the subcommand-specific code so the error path can report it.
struct CliError : Error {
    CliError(std::string code, const std::string& what) : Error(what), code(std::move(code)) {}
    std::string code;
};

fs::path out_path(const Globals& g, const std::string& name) { return fs::path(g.out_dir) / name; }

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw CliError("io", "cannot open " + p.string() + " for writing");
    out << text;
}

/// Result document for a subcommand: <cmd>.json, or <cmd>.csv when --format csv.
void write_result(const Globals& g, const std::string& cmd, const json& doc, const std::string& csv) {
    if (g.format == "csv") write_text(out_path(g, cmd + ".csv"), csv);
    else write_text(out_path(g, cmd + ".json"), doc.dump(2) + "\n");
}

// Every option of the global app and the chosen subcommand, with effective values.
json config_echo(const CLI::App& app, const CLI::App& sub) {
    json options = json::object();
    json argv = json::array();
    auto collect = [&](const CLI::App& a) {
        for (const CLI::Option* opt : a.get_options()) {
            const std::string name = opt->get_single_name();
            if (name == "help" || opt->get_lnames().empty()) continue;
            const std::string flag = "--" + opt->get_lnames().front();
            if (opt->get_expected_max() == 0) {
                const bool on = opt->count() > 0;
                options[name] = on;
                if (on) argv.push_back(flag);
                continue;
            }
            std::vector<std::string> values = opt->count() > 0 ? opt->results() : std::vector<std::string>{};
            if (values.empty() && !opt->get_default_str().empty()) {
                std::string def = opt->get_default_str();
                // vector defaults render as "[a,b]"
                if (opt->get_expected_max() > 1 && def.size() >= 2 && def.front() == '[' && def.back() == ']') {
                    std::stringstream ss(def.substr(1, def.size() - 2));
                    for (std::string item; std::getline(ss, item, ',');) values.push_back(item);
                } else {
                    values.push_back(def);
                }
            }
            if (values.empty()) {
                options[name] = nullptr;
                continue;
            }
            options[name] = opt->get_expected_max() > 1 ? json(values) : json(values.front());
            for (const auto& v : values) {
                argv.push_back(flag);
                argv.push_back(v);
            }
        }
    };
    collect(app);
    argv.push_back(sub.get_name());
    collect(sub);
    return {{"tool", "bevsense-cli"}, {"version", kToolVersion}, {"command", sub.get_name()},
            {"options", options}, {"argv", argv}};
}

std::string slug(std::string s) {
    for (auto& c : s) c = std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : '_';
    return s;
}

std::vector<FeatureKind> kinds_in_order(const std::vector<ColumnMeta>& cols) {
    std::vector<FeatureKind> out;
    for (const auto& c : cols)
        if (std::find(out.begin(), out.end(), c.kind) == out.end()) out.push_back(c.kind);
    return out;
}

/// Feature matrix over `d` laid out exactly as `columns`.
FeatureMatrix features_for_columns(const Dataset& d, const std::vector<ColumnMeta>& columns) {
    const FeatureMatrix full = build_feature_matrix(d, kinds_in_order(columns));
    std::vector<Eigen::Index> idx;
    for (const auto& c : columns) {
        const auto it = std::find(full.columns.begin(), full.columns.end(), c);
        if (it == full.columns.end())
            throw InvalidArgument("dataset has no " + std::string(to_string(c.kind)) + " column at " +
                                  format_double(c.frequency_hz) + " Hz");
        idx.push_back(static_cast<Eigen::Index>(it - full.columns.begin()));
    }
    return select_columns(full, idx);
}

std::string column_name(const ColumnMeta& c) {
    return std::string(to_string(c.kind)) + "@" + format_double(c.frequency_hz);
}

char parse_variant(const std::string& v) {
    if (v.size() != 1 || v[0] < 'A' || v[0] > 'D') throw InvalidArgument("variant must be one of A, B, C, D");
    return v[0];
}

std::vector<ClassSpec> load_kind_specs(const std::string& spec) {
    if (spec == "builtin") return default_kind_specs();
    return kind_specs_from_json(read_json_file(spec), spec);
}

FreshnessBundle load_freshness(const std::string& spec) {
    if (spec == "builtin") return default_freshness_bundle();
    return freshness_from_json(read_json_file(spec), spec);
}

FrequencyGrid make_grid(double f_min, double f_max, std::size_t n) { return make_log_grid(f_min, f_max, n); }

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    std::string spec = "builtin";
    std::size_t samples = kDefaultSamplesPerClass;
    bool freshness = false;
    std::string beverage = "all";
    std::string name;
    double f_min = kDefaultFMin, f_max = kDefaultFMax;
    std::size_t points = kDefaultPoints;
};

void cmd_simulate(const Globals& g, const SimulateOpts& o) {
    const auto grid = make_grid(o.f_min, o.f_max, o.points);
    json datasets = json::array();
    std::ostringstream csv;
    csv << "path,rows,classes\n";
    auto emit = [&](const Dataset& d, const std::string& file, const std::string& registry) {
        const auto path = out_path(g, file);
        write_dataset(d, path, registry);
        datasets.push_back({{"path", path.string()}, {"rows", d.size()}, {"classes", d.labels()}});
        csv << detail::csv_quote(path.string()) << ',' << d.size() << ',' << d.labels().size() << '\n';
    };
    if (!o.freshness) {
        emit(generate_kind_dataset(load_kind_specs(o.spec), o.samples, grid, g.seed),
             (o.name.empty() ? "dataset" : o.name) + ".csv", "builtin");
    } else {
        const auto bundle = load_freshness(o.spec);
        bool any = false;
        for (std::size_t i = 0; i < bundle.beverages.size(); ++i) {
            const auto& b = bundle.beverages[i];
            if (o.beverage != "all" && o.beverage != b.base.label) continue;
            any = true;
            const auto d = generate_freshness_dataset(b.base, b.drift, bundle.hours, o.samples, grid,
                                                      derive_seed(g.seed, i));
            emit(d, (o.name.empty() ? "freshness" : o.name) + "_" + slug(b.base.label) + ".csv", "none");
        }
        if (!any) throw InvalidArgument("no freshness beverage named '" + o.beverage + "'");
    }
    write_result(g, "simulate", {{"datasets", datasets}}, csv.str());
}

// ---------------------------------------------------------------- fit

struct FitOpts {
    std::string dataset;
    std::size_t row = 0;
    std::string circuit;
    std::string weighting = "proportional";
    bool free_alpha = false;
    int restarts = 0;
    int max_iter = 200;
};

void cmd_fit(const Globals& g, const FitOpts& o) {
    const Dataset d = read_dataset(o.dataset);
    if (o.row >= d.size()) throw InvalidArgument("row " + std::to_string(o.row) + " is out of range");
    const Observation& obs = d.observations[o.row];

    CircuitModel tmpl;
    if (!o.circuit.empty()) {
        tmpl = circuit_from_json(read_json_file(o.circuit), o.circuit);
    } else {
        const auto specs = default_kind_specs();
        const auto it = std::find_if(specs.begin(), specs.end(), [&](const ClassSpec& s) { return s.label == obs.label; });
        if (it == specs.end())
            throw InvalidArgument("no --circuit given and label '" + obs.label + "' has no built-in template");
        tmpl = it->circuit;
    }
    FitProblem prob{tmpl, {}, obs.spectrum,
                    o.weighting == "unit" ? Weighting::unit : Weighting::proportional};
    if (o.free_alpha) {
        for (std::size_t i = 0; i < tmpl.parameter_count(); ++i) prob.free.push_back(i);
    } else {
        prob.free = default_free_parameters(tmpl);
    }
    const auto all = tmpl.parameters();
    std::vector<double> p0;
    for (auto k : prob.free) p0.push_back(all[k]);

    FitOptions fo;
    fo.max_iter = o.max_iter;
    FitResult best = fit_circuit(prob, p0, fo);
    const auto info = tmpl.parameter_info();
    // Seeded restarts: each start scales the template values by up to x/÷ 2.
    for (int r = 0; r < o.restarts; ++r) {
        Rng rng(derive_seed(g.seed, static_cast<std::uint64_t>(r)));
        std::vector<double> start = p0;
        for (std::size_t k = 0; k < start.size(); ++k) {
            start[k] *= std::pow(2.0, 2 * rng.uniform() - 1);
            if (info[prob.free[k]].role == ParameterRole::cpe_alpha) start[k] = std::min(start[k], 1.0);
        }
        auto res = fit_circuit(prob, start, fo);
        if (res.cost < best.cost) best = std::move(res);
    }

    json doc = fit_result_to_json(best, prob);
    doc["row"] = o.row;
    doc["label"] = obs.label;
    std::ostringstream csv;
    csv << "parameter,value,variance\n";
    for (std::size_t k = 0; k < prob.free.size(); ++k)
        csv << info[prob.free[k]].name << ',' << format_double(best.params[k]) << ','
            << (best.covariance_diag ? format_double((*best.covariance_diag)[k]) : "") << '\n';
    write_result(g, "fit", doc, csv.str());
}

// ---------------------------------------------------------------- svd

struct SvdOpts {
    std::string dataset;
    std::vector<std::string> kinds = {"amplitude", "phase", "real", "imaginary"};
    bool no_center = false;
};

void cmd_svd(const Globals& g, const SvdOpts& o) {
    const Dataset d = read_dataset(o.dataset);
    json peaks = json::object();
    std::ostringstream csv;
    csv << "kind,peak_frequency_hz\n";
    for (const auto& name : o.kinds) {
        const FeatureKind k = parse_feature_kind(name);
        const ImportanceProfile p = importance_profile(build_feature_matrix(d, {k}), !o.no_center);
        write_text(out_path(g, "profile_" + name + ".json"), profile_to_json(p).dump(2) + "\n");
        std::ostringstream side;
        side << "frequency_hz,weight\n";
        for (std::size_t i = 0; i < p.frequencies.size(); ++i)
            side << format_double(p.frequencies[i]) << ',' << format_double(p.weights[i]) << '\n';
        write_text(out_path(g, "profile_" + name + ".csv"), side.str());
        peaks[name] = p.peak_frequency;
        csv << name << ',' << format_double(p.peak_frequency) << '\n';
    }
    write_result(g, "svd", {{"centered", !o.no_center}, {"peak_frequency_hz", peaks}}, csv.str());
}

// ---------------------------------------------------------------- reduce

struct BandOpts {
    double lo = kReducedBandLo, hi = kReducedBandHi;
    std::size_t points = kReducedPoints;
};

struct ReduceOpts {
    std::string dataset;
    std::string variant = "B";
    BandOpts band;
};

void cmd_reduce(const Globals& g, const ReduceOpts& o) {
    const Dataset d = read_dataset(o.dataset);
    const FeatureMatrix fm = reduce_to_band(build_feature_matrix(d, dataset_variant(parse_variant(o.variant))),
                                            o.band.lo, o.band.hi, o.band.points);
    std::ostringstream m;
    m << "label,sample_id";
    for (const auto& c : fm.columns) m << ',' << column_name(c);
    m << '\n';
    for (Eigen::Index i = 0; i < fm.rows(); ++i) {
        const auto& obs = d.observations[static_cast<std::size_t>(i)];
        m << detail::csv_quote(obs.label) << ',' << obs.sample_id;
        for (Eigen::Index j = 0; j < fm.cols(); ++j) m << ',' << format_double(fm.data(i, j));
        m << '\n';
    }
    write_text(out_path(g, "reduced_features.csv"), m.str());
    const auto freqs = fm.frequencies();
    std::ostringstream csv;
    csv << "frequency_hz\n";
    for (double f : freqs) csv << format_double(f) << '\n';
    write_result(g, "reduce",
                 {{"variant", o.variant}, {"frequencies_hz", freqs}, {"columns", fm.cols()}, {"rows", fm.rows()},
                  {"features_path", out_path(g, "reduced_features.csv").string()}},
                 csv.str());
}

// ---------------------------------------------------------------- train / evaluate / classify

struct HyperOpts {
    int trees = 100;
    int max_depth = 0;
    int threads = 1;
    bool standardize = false;
    std::vector<int> hidden = {64, 32};
    int epochs = 200;
    double lr = 1e-3;
    int batch = 16;
};

ForestHyper forest_hyper(const HyperOpts& h, std::uint64_t seed) {
    ForestHyper f;
    f.n_trees = h.trees;
    f.max_depth = h.max_depth;
    f.n_threads = h.threads;
    f.seed = seed;
    return f;
}

MlpHyper mlp_hyper(const HyperOpts& h, std::uint64_t seed) {
    MlpHyper m;
    m.hidden_layers = h.hidden;
    m.epochs = h.epochs;
    m.learning_rate = h.lr;
    m.batch_size = h.batch;
    m.seed = seed;
    return m;
}

struct TrainOpts {
    std::string dataset;
    std::string classifier = "rf";
    std::string variant = "A";
    bool reduced = false;
    BandOpts band;
    double test_fraction = 0.3;
    std::uint64_t split_seed = 0;
    HyperOpts hyper;
    std::string model_name = "model.json";
};

void cmd_train(const Globals& g, const TrainOpts& o) {
    const Dataset d = read_dataset(o.dataset);
    FeatureMatrix fm = build_feature_matrix(d, dataset_variant(parse_variant(o.variant)));
    if (o.reduced) fm = reduce_to_band(fm, o.band.lo, o.band.hi, o.band.points);
    const TrainTestSplit split = stratified_split(fm, o.test_fraction, o.split_seed);
    const TrainedModel m = o.classifier == "rf" ? train_forest(split.train, forest_hyper(o.hyper, g.seed), o.hyper.standardize)
                                                : train_mlp(split.train, mlp_hyper(o.hyper, g.seed));
    json doc = model_to_json(m);
    doc["training"] = {{"dataset", o.dataset},          {"variant", o.variant},
                       {"reduced", o.reduced},          {"test_fraction", o.test_fraction},
                       {"split_seed", o.split_seed},    {"train_rows", split.train.rows()},
                       {"test_rows", split.test.rows()}};
    const auto path = out_path(g, o.model_name);
    write_text(path, doc.dump() + "\n");
    const double train_acc = evaluate(m, split.train).accuracy;
    std::ostringstream csv;
    csv << "model_path,train_rows,test_rows,train_accuracy\n"
        << detail::csv_quote(path.string()) << ',' << split.train.rows() << ',' << split.test.rows() << ','
        << format_double(train_acc) << '\n';
    write_result(g, "train",
                 {{"model_path", path.string()}, {"train_rows", split.train.rows()},
                  {"test_rows", split.test.rows()}, {"train_accuracy", train_acc}},
                 csv.str());
}

std::string report_csv(const EvalReport& r) {
    std::ostringstream csv;
    csv << "class,precision,recall";
    for (const auto& c : r.classes) csv << ",pred_" << detail::csv_quote(c);
    csv << '\n';
    for (std::size_t i = 0; i < r.classes.size(); ++i) {
        csv << detail::csv_quote(r.classes[i]) << ',' << format_double(r.precision[i]) << ','
            << format_double(r.recall[i]);
        for (int v : r.confusion[i]) csv << ',' << v;
        csv << '\n';
    }
    return csv.str();
}

struct EvaluateOpts {
    std::string model;
    std::string dataset;
    bool all_rows = false;
};

void cmd_evaluate(const Globals& g, const EvaluateOpts& o) {
    const json doc = read_json_file(o.model);
    const TrainedModel m = model_from_json(doc);
    const std::string dataset = o.dataset.empty() ? doc.value("/training/dataset"_json_pointer, "") : o.dataset;
    if (dataset.empty()) throw InvalidArgument("no --dataset given and the model does not record one");
    const FeatureMatrix fm = features_for_columns(read_dataset(dataset), m.columns);
    FeatureMatrix test = fm;
    if (!o.all_rows) {
        if (!doc.contains("training")) throw InvalidArgument("model has no training record; pass --all");
        test = stratified_split(fm, doc.at("training").at("test_fraction").get<double>(),
                                doc.at("training").at("split_seed").get<std::uint64_t>())
                   .test;
    }
    const EvalReport r = evaluate(m, test);
    json out = eval_report_to_json(r);
    out["dataset"] = dataset;
    out["rows"] = o.all_rows ? "all" : "test_split";
    write_result(g, "evaluate", out, report_csv(r));
}

struct ClassifyOpts {
    std::string model;
    std::string dataset;
};

void cmd_classify(const Globals& g, const ClassifyOpts& o) {
    const TrainedModel m = model_from_json(read_json_file(o.model));
    const Dataset d = read_dataset(o.dataset);
    const FeatureMatrix fm = features_for_columns(d, m.columns);
    json preds = json::array();
    std::ostringstream csv;
    csv << "row,sample_id,label,predicted,probability\n";
    for (Eigen::Index i = 0; i < fm.rows(); ++i) {
        const Prediction p = predict(m, fm.data.row(i).transpose());
        const auto& obs = d.observations[static_cast<std::size_t>(i)];
        const double conf = p.probabilities[static_cast<std::size_t>(p.class_index)];
        preds.push_back({{"row", i},
                         {"sample_id", obs.sample_id},
                         {"label", obs.label},
                         {"predicted", p.label},
                         {"probabilities", p.probabilities}});
        csv << i << ',' << obs.sample_id << ',' << detail::csv_quote(obs.label) << ','
            << detail::csv_quote(p.label) << ',' << format_double(conf) << '\n';
    }
    write_result(g, "classify", {{"classes", m.classes}, {"predictions", preds}}, csv.str());
}

// ---------------------------------------------------------------- experiment

struct ExperimentOpts {
    std::string dataset;
    bool freshness = false;
    std::string spec = "builtin";
    std::size_t samples = kDefaultSamplesPerClass;
    double test_fraction = 0.3;
    std::uint64_t split_seed = 0;
    BandOpts band;
    HyperOpts hyper;
};

void cmd_experiment(const Globals& g, const ExperimentOpts& o) {
    ExperimentConfig cfg;
    cfg.test_fraction = o.test_fraction;
    cfg.split_seed = o.split_seed;
    cfg.forest = forest_hyper(o.hyper, g.seed);
    cfg.mlp = mlp_hyper(o.hyper, g.seed);
    cfg.band_lo = o.band.lo;
    cfg.band_hi = o.band.hi;
    cfg.band_points = o.band.points;
    json echo = {{"test_fraction", cfg.test_fraction},
                 {"split_seed", cfg.split_seed},
                 {"forest", forest_hyper_to_json(cfg.forest)},
                 {"mlp", mlp_hyper_to_json(cfg.mlp)},
                 {"band", {{"f_lo", cfg.band_lo}, {"f_hi", cfg.band_hi}, {"points", cfg.band_points}}}};

    if (o.freshness) {
        std::vector<std::pair<std::string, Dataset>> sets;
        if (!o.dataset.empty()) {
            sets.emplace_back(fs::path(o.dataset).stem().string(), read_dataset(o.dataset));
        } else {
            const auto bundle = load_freshness(o.spec);
            for (std::size_t i = 0; i < bundle.beverages.size(); ++i) {
                const auto& b = bundle.beverages[i];
                sets.emplace_back(b.base.label,
                                  generate_freshness_dataset(b.base, b.drift, bundle.hours, o.samples, default_grid(),
                                                             derive_seed(g.seed, i)));
            }
        }
        json cells = json::array();
        std::ostringstream csv;
        csv << "beverage,amplitude,phase\n";
        for (const auto& [name, d] : sets) {
            const FeatureMatrix probe = build_feature_matrix(d, {FeatureKind::Amplitude});
            const auto split = stratified_split_indices(probe.labels, static_cast<int>(probe.classes.size()),
                                                        cfg.test_fraction, cfg.split_seed);
            const auto amp = run_cell(d, "RF", 'C', false, cfg, split);
            const auto ph = run_cell(d, "RF", 'D', false, cfg, split);
            cells.push_back({{"beverage", name},
                             {"amplitude", amp.report.accuracy},
                             {"phase", ph.report.accuracy},
                             {"reports", {{"amplitude", eval_report_to_json(amp.report)},
                                          {"phase", eval_report_to_json(ph.report)}}}});
            csv << detail::csv_quote(name) << ',' << format_double(amp.report.accuracy) << ','
                << format_double(ph.report.accuracy) << '\n';
        }
        write_result(g, "experiment", {{"kind", "freshness"}, {"config", echo}, {"cells", cells}}, csv.str());
        return;
    }

    const Dataset d = o.dataset.empty()
                          ? generate_kind_dataset(load_kind_specs(o.spec), o.samples, default_grid(), g.seed)
                          : read_dataset(o.dataset);
    const ExperimentResult r = run_kind_experiment(d, cfg);
    json grid = json::object();
    json cells = json::array();
    for (const auto& c : r.cells) {
        const std::string col = c.classifier + " " + c.variant;
        grid[c.reduced ? "reduced" : "full"][col] = c.report.accuracy;
        cells.push_back({{"classifier", c.classifier},
                         {"variant", std::string(1, c.variant)},
                         {"features", c.reduced ? "reduced" : "full"},
                         {"accuracy", c.report.accuracy},
                         {"report", eval_report_to_json(c.report)}});
    }
    std::ostringstream csv;
    csv << "features,RF A,RF B,RF C,RF D,DNN C,DNN D\n";
    for (bool reduced : {false, true}) {
        csv << (reduced ? "reduced" : "full");
        for (const auto& [cls, v] : std::vector<std::pair<std::string, char>>{
                 {"RF", 'A'}, {"RF", 'B'}, {"RF", 'C'}, {"RF", 'D'}, {"DNN", 'C'}, {"DNN", 'D'}})
            csv << ',' << format_double(r.cell(cls, v, reduced).report.accuracy);
        csv << '\n';
    }
    write_result(g, "experiment",
                 {{"kind", "beverage"},
                  {"config", echo},
                  {"grid", grid},
                  {"reduced_frequencies_hz", r.reduced_frequencies},
                  {"split", {{"train", r.split.train}, {"test", r.split.test}}},
                  {"cells", cells}},
                 csv.str());
}

// ---------------------------------------------------------------- replay / ingest

struct ReplayOpts {
    std::string dataset;
    std::string output = "stream.bin";
    bool shuffle = false;
};

void cmd_replay(const Globals& g, const ReplayOpts& o) {
    const Dataset d = read_dataset(o.dataset);
    if (d.size() > 65536) throw InvalidArgument("at most 65536 sweeps fit the 16-bit sweep id");
    std::vector<PointFrame> frames;
    json sweeps = json::array();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& obs = d.observations[i];
        const auto f = stream_sweep(obs.spectrum, static_cast<std::uint16_t>(i));
        frames.insert(frames.end(), f.begin(), f.end());
        sweeps.push_back({{"sweep_id", i}, {"label", obs.label}, {"sample_id", obs.sample_id}});
    }
    if (o.shuffle) {
        Rng rng(g.seed);
        rng.shuffle(std::span<PointFrame>(frames));
    }
    const auto bytes = encode_stream(frames);
    const bool to_stdout = o.output == "-";
    const fs::path stream_path = to_stdout ? fs::path("-") : out_path(g, o.output);
    if (to_stdout) {
        std::cout.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        std::cout.flush();
    } else {
        write_text(stream_path, std::string(bytes.begin(), bytes.end()));
    }
    const fs::path index_path = out_path(g, (to_stdout ? std::string("stream") : o.output) + ".index.json");
    const json index = {{"format", "bevsense-stream-index"},
                        {"schema_version", 1},
                        {"frame_size", kFrameSize},
                        {"grid", grid_to_json(d.grid())},
                        {"stimulus_amplitude_mV", d.stimulus_amplitude_mv},
                        {"sweeps", sweeps}};
    write_text(index_path, index.dump(2) + "\n");
    std::ostringstream csv;
    csv << "stream,index,sweeps,frames,bytes\n"
        << detail::csv_quote(stream_path.string()) << ',' << detail::csv_quote(index_path.string()) << ','
        << d.size() << ',' << frames.size() << ',' << bytes.size() << '\n';
    write_result(g, "replay",
                 {{"stream", stream_path.string()},
                  {"index", index_path.string()},
                  {"sweeps", d.size()},
                  {"frames", frames.size()},
                  {"bytes", bytes.size()}},
                 csv.str());
}

struct IngestOpts {
    std::string frames;
    std::string index;
    std::string name = "ingested";
};

void cmd_ingest(const Globals& g, const IngestOpts& o) {
    std::string raw;
    if (o.frames == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        raw = ss.str();
    } else {
        std::ifstream in(o.frames, std::ios::binary);
        if (!in) throw FormatError("missing_file", o.frames, "cannot open frame stream");
        std::ostringstream ss;
        ss << in.rdbuf();
        raw = ss.str();
    }
    std::string index_path = o.index;
    if (index_path.empty()) {
        if (o.frames == "-") throw InvalidArgument("--index is required when reading frames from stdin");
        index_path = o.frames + ".index.json";
    }
    const json index = read_json_file(index_path);
    FrequencyGrid grid;
    try {
        grid = grid_from_json(index.at("grid"));
    } catch (const json::exception& e) {
        throw FormatError("bad_index", index_path + ".grid", e.what());
    }
    const auto frames = decode_stream(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));

    std::map<std::uint16_t, SweepAssembler> assemblers;
    for (const auto& f : frames) assemblers[f.sweep_id].feed(f);

    Dataset d;
    d.stimulus_amplitude_mv = index.value("stimulus_amplitude_mV", kDefaultStimulusMv);
    for (const auto& s : index.at("sweeps")) {
        const auto id = s.at("sweep_id").get<std::uint16_t>();
        const auto it = assemblers.find(id);
        if (it == assemblers.end())
            throw AssemblyError(AssemblyErrorCode::MissingPoints, {},
                                "sweep " + std::to_string(id) + " has no frames in the stream");
        SpectrumMeta meta;
        meta.stimulus_amplitude_mv = d.stimulus_amplitude_mv;
        meta.label = s.at("label").get<std::string>();
        try {
            d.observations.push_back(
                {*meta.label, s.at("sample_id").get<std::uint64_t>(), it->second.finish(grid, meta)});
        } catch (const AssemblyError& e) {
            throw AssemblyError(e.code(), e.indices(), "sweep " + std::to_string(id) + ": " + e.what());
        }
        assemblers.erase(it);
    }
    if (!assemblers.empty())
        throw AssemblyError(AssemblyErrorCode::MixedSweep, {},
                            "stream carries sweep " + std::to_string(assemblers.begin()->first) +
                                " which the index does not list");
    const auto path = out_path(g, o.name + ".csv");
    write_dataset(d, path);
    std::ostringstream csv;
    csv << "path,rows,frames\n" << detail::csv_quote(path.string()) << ',' << d.size() << ',' << frames.size() << '\n';
    write_result(g, "ingest", {{"path", path.string()}, {"rows", d.size()}, {"frames", frames.size()}}, csv.str());
}

// ---------------------------------------------------------------- plot

struct PlotOpts {
    std::string dataset;
    std::string profile;
    std::string output = "plot.svg";
    bool log_y = false;
};

void cmd_plot(const Globals& g, const PlotOpts& o) {
    if (o.dataset.empty() == o.profile.empty()) throw InvalidArgument("pass exactly one of --dataset or --profile");
    std::vector<PlotSeries> series;
    PlotOptions po;
    po.log_y = o.log_y;
    std::string value_name;
    if (!o.dataset.empty()) {
        const Dataset d = read_dataset(o.dataset);
        series = class_amplitude_series(d);
        po.title = "Mean amplitude per class";
        po.y_label = "Amplitude (ohm)";
        value_name = "amplitude_ohm";
    } else {
        const ImportanceProfile p = profile_from_json(read_json_file(o.profile));
        series.push_back({std::string(to_string(p.kind)), p.frequencies, p.weights, p.peak_frequency});
        po.title = "First right singular vector, " + std::string(to_string(p.kind));
        po.y_label = "|v1| weight";
        value_name = "weight";
    }
    const fs::path svg = out_path(g, o.output);
    fs::path side = svg;
    side.replace_extension(".csv");
    write_text(svg, render_svg(series, po));
    write_text(side, series_csv(series, value_name));
    std::ostringstream csv;
    csv << "svg,data,series\n"
        << detail::csv_quote(svg.string()) << ',' << detail::csv_quote(side.string()) << ',' << series.size() << '\n';
    write_result(g, "plot", {{"svg", svg.string()}, {"data", side.string()}, {"series", series.size()}}, csv.str());
}

// ---------------------------------------------------------------- errors

json error_json(const std::string& type, const std::string& code, const std::string& message) {
    return {{"error", {{"type", type}, {"code", code}, {"message", message}}}};
}

int fail(json err, int status) {
    std::cerr << err.dump() << std::endl;
    return status;
}

void add_band(CLI::App* sub, BandOpts& b) {
    sub->add_option("--band-lo", b.lo, "Reduced band lower edge (Hz)");
    sub->add_option("--band-hi", b.hi, "Reduced band upper edge (Hz)");
    sub->add_option("--band-points", b.points, "Reduced band point count")->check(CLI::PositiveNumber);
}

void add_hyper(CLI::App* sub, HyperOpts& h) {
    sub->add_option("--trees", h.trees, "Random forest tree count")->check(CLI::PositiveNumber);
    sub->add_option("--max-depth", h.max_depth, "Tree depth limit (0 = unlimited)")->check(CLI::NonNegativeNumber);
    sub->add_option("--threads", h.threads, "Tree-training threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--hidden", h.hidden, "Hidden layer sizes")->delimiter(',');
    sub->add_option("--epochs", h.epochs, "Network training epochs")->check(CLI::PositiveNumber);
    sub->add_option("--lr", h.lr, "Network learning rate")->check(CLI::PositiveNumber);
    sub->add_option("--batch", h.batch, "Network batch size")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Impedance-spectrum beverage toolkit"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--seed", g.seed, "Master random seed");
    app.add_option("--out-dir", g.out_dir, "Directory for all outputs");
    app.add_option("--format", g.format, "Result document format")->check(CLI::IsMember({"json", "csv"}));

    SimulateOpts sim;
    auto* s_sim = app.add_subcommand("simulate", "Generate a synthetic dataset from a class spec");
    s_sim->add_option("--spec", sim.spec, "Spec JSON file or 'builtin'");
    s_sim->add_option("--samples", sim.samples, "Samples per class")->check(CLI::PositiveNumber);
    s_sim->add_flag("--freshness", sim.freshness, "Generate freshness datasets instead of beverage kinds");
    s_sim->add_option("--beverage", sim.beverage, "Freshness beverage label, or 'all'");
    s_sim->add_option("--name", sim.name, "Output file stem");
    s_sim->add_option("--f-min", sim.f_min, "Lowest sweep frequency (Hz)");
    s_sim->add_option("--f-max", sim.f_max, "Highest sweep frequency (Hz)");
    s_sim->add_option("--points", sim.points, "Sweep points")->check(CLI::Range(2, 256));

    FitOpts fit;
    auto* s_fit = app.add_subcommand("fit", "Fit an equivalent circuit to one observation");
    s_fit->add_option("--dataset", fit.dataset, "Dataset CSV")->required();
    s_fit->add_option("--row", fit.row, "Observation row");
    s_fit->add_option("--circuit", fit.circuit, "Circuit JSON (default: built-in template for the row's label)");
    s_fit->add_option("--weighting", fit.weighting, "Residual weighting")->check(CLI::IsMember({"unit", "proportional"}));
    s_fit->add_flag("--free-alpha", fit.free_alpha, "Also fit CPE exponents");
    s_fit->add_option("--restarts", fit.restarts, "Extra seeded starting points")->check(CLI::NonNegativeNumber);
    s_fit->add_option("--max-iter", fit.max_iter, "Iteration limit")->check(CLI::PositiveNumber);

    SvdOpts svd;
    auto* s_svd = app.add_subcommand("svd", "Frequency-importance profiles from the first right singular vector");
    s_svd->add_option("--dataset", svd.dataset, "Dataset CSV")->required();
    s_svd->add_option("--kind", svd.kinds, "Feature kinds")
        ->check(CLI::IsMember({"amplitude", "phase", "real", "imaginary"}));
    s_svd->add_flag("--no-center", svd.no_center, "Skip column centering");

    ReduceOpts red;
    auto* s_red = app.add_subcommand("reduce", "Restrict features to the reduced low-frequency band");
    s_red->add_option("--dataset", red.dataset, "Dataset CSV")->required();
    s_red->add_option("--variant", red.variant, "Feature variant A-D");
    add_band(s_red, red.band);

    TrainOpts tr;
    auto* s_tr = app.add_subcommand("train", "Train a classifier on the training split");
    s_tr->add_option("--dataset", tr.dataset, "Dataset CSV")->required();
    s_tr->add_option("--classifier", tr.classifier, "Classifier")->check(CLI::IsMember({"rf", "dnn"}));
    s_tr->add_option("--variant", tr.variant, "Feature variant A-D");
    s_tr->add_flag("--reduced", tr.reduced, "Use the reduced band");
    add_band(s_tr, tr.band);
    s_tr->add_option("--test-fraction", tr.test_fraction, "Held-out fraction per class");
    s_tr->add_option("--split-seed", tr.split_seed, "Seed for the stratified split");
    s_tr->add_flag("--standardize", tr.hyper.standardize, "Standardize inputs for the forest");
    add_hyper(s_tr, tr.hyper);
    s_tr->add_option("--model-out", tr.model_name, "Model file name inside --out-dir");

    EvaluateOpts ev;
    auto* s_ev = app.add_subcommand("evaluate", "Evaluate a trained model on its held-out split");
    s_ev->add_option("--model", ev.model, "Model JSON")->required();
    s_ev->add_option("--dataset", ev.dataset, "Dataset CSV (default: the one recorded in the model)");
    s_ev->add_flag("--all", ev.all_rows, "Evaluate every row instead of the held-out split");

    ClassifyOpts cl;
    auto* s_cl = app.add_subcommand("classify", "Predict labels for every observation");
    s_cl->add_option("--model", cl.model, "Model JSON")->required();
    s_cl->add_option("--dataset", cl.dataset, "Dataset CSV")->required();

    ExperimentOpts ex;
    auto* s_ex = app.add_subcommand("experiment", "Run the full classifier x feature-set grid");
    s_ex->add_option("--dataset", ex.dataset, "Dataset CSV (default: simulate from --spec)");
    s_ex->add_flag("--freshness", ex.freshness, "Freshness grid: amplitude-only and phase-only forests");
    s_ex->add_option("--spec", ex.spec, "Spec JSON file or 'builtin'");
    s_ex->add_option("--samples", ex.samples, "Samples per class when simulating")->check(CLI::PositiveNumber);
    s_ex->add_option("--test-fraction", ex.test_fraction, "Held-out fraction per class");
    s_ex->add_option("--split-seed", ex.split_seed, "Seed for the stratified split");
    add_band(s_ex, ex.band);
    add_hyper(s_ex, ex.hyper);

    ReplayOpts rp;
    auto* s_rp = app.add_subcommand("replay", "Write a dataset as a binary frame stream");
    s_rp->add_option("--dataset", rp.dataset, "Dataset CSV")->required();
    s_rp->add_option("--output", rp.output, "Stream file name inside --out-dir, or '-' for stdout");
    s_rp->add_flag("--shuffle", rp.shuffle, "Emit frames in seeded random order");

    IngestOpts in;
    auto* s_in = app.add_subcommand("ingest", "Assemble a frame stream back into a dataset");
    s_in->add_option("--frames", in.frames, "Frame stream file, or '-' for stdin")->required();
    s_in->add_option("--index", in.index, "Stream index JSON (default: <frames>.index.json)");
    s_in->add_option("--name", in.name, "Output dataset stem");

    PlotOpts pl;
    auto* s_pl = app.add_subcommand("plot", "SVG chart of class amplitudes or an importance profile");
    s_pl->add_option("--dataset", pl.dataset, "Dataset CSV");
    s_pl->add_option("--profile", pl.profile, "Profile JSON written by svd");
    s_pl->add_option("--output", pl.output, "SVG file name inside --out-dir");
    s_pl->add_flag("--log-y", pl.log_y, "Logarithmic value axis");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(error_json("usage", "bad_arguments", e.what()), 2);
    }

    CLI::App* sub = app.get_subcommands().front();
    try {
        fs::create_directories(g.out_dir);
        write_text(out_path(g, sub->get_name() + ".config.json"), config_echo(app, *sub).dump(2) + "\n");
        const std::string name = sub->get_name();
        if (name == "simulate") cmd_simulate(g, sim);
        else if (name == "fit") cmd_fit(g, fit);
        else if (name == "svd") cmd_svd(g, svd);
        else if (name == "reduce") cmd_reduce(g, red);
        else if (name == "train") cmd_train(g, tr);
        else if (name == "evaluate") cmd_evaluate(g, ev);
        else if (name == "classify") cmd_classify(g, cl);
        else if (name == "experiment") cmd_experiment(g, ex);
        else if (name == "replay") cmd_replay(g, rp);
        else if (name == "ingest") cmd_ingest(g, in);
        else if (name == "plot") cmd_plot(g, pl);
    } catch (const FormatError& e) {
        json err = error_json("format", e.code(), e.what());
        err["error"]["where"] = e.where();
        return fail(err, 1);
    } catch (const FrameError& e) {
        return fail(error_json("frame", to_string(e.code()), e.what()), 1);
    } catch (const AssemblyError& e) {
        json err = error_json("assembly", to_string(e.code()), e.what());
        err["error"]["indices"] = e.indices();
        return fail(err, 1);
    } catch (const CliError& e) {
        return fail(error_json("io", e.code, e.what()), 1);
    } catch (const InvalidArgument& e) {
        return fail(error_json("invalid_argument", "invalid_argument", e.what()), 1);
    } catch (const NumericalError& e) {
        return fail(error_json("numerical", "numerical", e.what()), 1);
    } catch (const json::exception& e) {
        return fail(error_json("format", "bad_json", e.what()), 1);
    } catch (const std::exception& e) {
        return fail(error_json("internal", "internal", e.what()), 1);
    }
    return 0;
}
