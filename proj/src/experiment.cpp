#include "ringrc/experiment.hpp"

#include "ringrc/errors.hpp"

#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#ifndef RINGRC_VERSION
#define RINGRC_VERSION "unknown"
#endif

namespace ringrc {

namespace {

using json = nlohmann::json;

std::string num(double v) { return fmt::format("{}", v); }

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

json device_reference() {
    // measured on the physical spin-wave ring; reported next to simulator values
    return json{{"c_stm_max", 4.77},
                {"c_stm_max_theta_int_s", 0.295e-6},
                {"c_pc_max", 1.47},
                {"operating_point", {{"theta_int_s", 1.95e-6}, {"gain_db", 0.49}, {"c_stm", 2.14}, {"c_pc", 1.47}}},
                {"digit_accuracy_saturation", 0.93},
                {"digit_accuracy_at_400_outputs", 0.80},
                {"baseline_accuracy", 0.252},
                {"baseline_accuracy_std", 0.037},
                {"chance_accuracy", 0.10}};
}

json capacity_json(const CapacityResult& c) {
    return json{{"capacity", c.capacity}, {"first_delay", c.first_delay}, {"per_delay", c.per_delay}};
}

json confusion_json(const Eigen::MatrixXi& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

const char* model_name(RingModel m) { return m == RingModel::full ? "full" : "linearized"; }
const char* diode_name(DiodeLaw d) { return d == DiodeLaw::amplitude ? "amplitude" : "power"; }

std::pair<double, double> mean_std(const std::vector<FoldOutcome>& folds) {
    double mean = 0.0;
    for (const auto& f : folds) mean += f.accuracy;
    mean /= static_cast<double>(folds.size());
    double var = 0.0;
    for (const auto& f : folds) var += (f.accuracy - mean) * (f.accuracy - mean);
    return {mean, std::sqrt(var / static_cast<double>(folds.size()))};
}

std::vector<Eigen::MatrixXd> features_with_cache(const ExperimentConfig& config, const Corpus& corpus,
                                                 std::uint64_t hash) {
    if (config.feature_cache) {
        if (auto cached = load_feature_cache(*config.feature_cache, hash); cached && cached->size() == corpus.size()) {
            return std::move(*cached);
        }
    }
    auto features = corpus_features(corpus, config.execution);
    if (config.feature_cache) save_feature_cache(*config.feature_cache, hash, features);
    return features;
}

std::vector<int> labels_of(const Corpus& corpus) {
    std::vector<int> labels;
    labels.reserve(corpus.size());
    for (const auto& s : corpus) labels.push_back(s.label);
    return labels;
}

WeightMatrix full_readout(const std::vector<Eigen::MatrixXd>& per_digit, const std::vector<int>& labels,
                         const ExperimentConfig& config, std::uint64_t hash, std::size_t n) {
    Eigen::Index units = 0;
    for (const auto& x : per_digit) units += x.cols();
    Eigen::MatrixXd V(per_digit.front().rows(), units);
    std::vector<int> unit_labels;
    unit_labels.reserve(static_cast<std::size_t>(units));
    Eigen::Index c = 0;
    for (std::size_t j = 0; j < per_digit.size(); ++j) {
        V.middleCols(c, per_digit[j].cols()) = per_digit[j];
        c += per_digit[j].cols();
        unit_labels.insert(unit_labels.end(), static_cast<std::size_t>(per_digit[j].cols()), labels[j]);
    }
    WeightMatrix W = train(V, one_hot(unit_labels), config.digit_readout);
    W.metadata["corpus_hash"] = fmt::format("{:016x}", hash);
    W.metadata["mask_seed"] = std::to_string(config.seeds.mask);
    W.metadata["noise_seed"] = std::to_string(config.seeds.noise);
    W.metadata["neurons"] = std::to_string(config.neurons);
    W.metadata["samples_per_neuron"] = std::to_string(n);
    return W;
}

void write_accuracy(const DigitExperiment& result, const std::filesystem::path& dir) {
    auto out = open_output(dir / "accuracy.csv");
    out << "samples_per_neuron,dimension,mean_accuracy,std_accuracy\n";
    for (const auto& p : result.points) {
        out << p.samples_per_neuron << ',' << p.dimension << ',' << num(p.mean) << ',' << num(p.stddev) << '\n';
    }
    // confusion matrices of the largest reservoir
    save_weights(result.readout, dir / "weights.csv");
    const AccuracyPoint& top = result.points.back();
    for (std::size_t k = 0; k < top.folds.size(); ++k) {
        auto cf = open_output(dir / fmt::format("confusion_fold{}.csv", k));
        cf << "true";
        for (int d = 0; d < 10; ++d) cf << ",pred_" << d;
        cf << '\n';
        for (int r = 0; r < 10; ++r) {
            cf << r;
            for (int c = 0; c < 10; ++c) cf << ',' << top.folds[k].confusion(r, c);
            cf << '\n';
        }
    }
}

json digits_json(const DigitExperiment& result) {
    json points = json::array();
    for (const auto& p : result.points) {
        json folds = json::array();
        for (const auto& f : p.folds) folds.push_back({{"accuracy", f.accuracy}, {"confusion", confusion_json(f.confusion)}});
        points.push_back({{"samples_per_neuron", p.samples_per_neuron},
                          {"dimension", p.dimension},
                          {"mean_accuracy", p.mean},
                          {"std_accuracy", p.stddev},
                          {"folds", folds}});
    }
    return json{{"corpus_hash", fmt::format("{:016x}", result.corpus_hash)},
                {"digits", std::accumulate(result.folds.begin(), result.folds.end(), std::size_t{0},
                                           [](std::size_t a, const auto& f) { return a + f.size(); })},
                {"sound_units", result.sound_units},
                {"accuracy", points}};
}

template <class Fn>
RunReport timed(const std::string& command, const ExperimentConfig& config, Fn&& body) {
    config.validate();
    std::filesystem::create_directories(config.output_dir);
    const auto start = std::chrono::steady_clock::now();
    RunReport report;
    report.command = command;
    report.json["command"] = command;
    report.json["version"] = RINGRC_VERSION;
    report.json["config"] = to_json(config);
    report.json["threads"] = config.execution == Execution::parallel ? worker_threads() : 1;
    body(report);
    report.json["wall_time_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_report(report, config.output_dir);
    return report;
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<double> ExperimentConfig::synchronized_grid(double round_trip, int first, int last) {
    std::vector<double> grid;
    for (int m = first; m <= last; ++m) grid.push_back((m + 0.25) * round_trip);
    return grid;
}

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    c.ring = RingParams::with_round_trip(236e-9, 64);
    c.theta_grid = synchronized_grid(c.ring.round_trip_time);
    c.gain_grid = {0.25, 0.49, 1.0, 2.0};
    c.digit_interval = 8.25 * c.ring.round_trip_time;
    return c;
}

ExperimentConfig ExperimentConfig::ci_preset() {
    ExperimentConfig c = defaults();
    c.ring.dt = c.ring.round_trip_time / 16;
    return c;
}

ExperimentConfig ExperimentConfig::desk_preset() {
    ExperimentConfig c = ci_preset();
    c.dataset.synth.speakers = 2;
    c.dataset.synth.utterances = 4;
    c.folds = 4;
    c.neurons = 50;
    return c;
}

void ExperimentConfig::validate() const {
    ring.validate();
    if (theta_grid.empty()) throw ConfigError("theta grid is empty");
    if (gain_grid.empty()) throw ConfigError("gain grid is empty");
    if (series_length < split.total()) {
        throw ConfigError(fmt::format("series length {} shorter than washout+train+test = {}", series_length,
                                      split.total()));
    }
    if (binary_samples == 0) throw ConfigError("binary samples must be >= 1");
    if (capacity.max_delay == 0 || capacity.max_delay >= series_length) throw ConfigError("bad max delay");
    if (neurons == 0) throw ConfigError("neurons must be >= 1");
    if (samples_per_neuron.empty()) throw ConfigError("samples-per-neuron list is empty");
    for (auto n : samples_per_neuron)
        if (n == 0) throw ConfigError("samples per neuron must be >= 1");
    if (folds < 2) throw ConfigError("need at least two folds");
    if (preroll_round_trips < 0.0) throw ConfigError("pre-roll must be >= 0");
    (void)ring.steps_in(digit_interval);
}

json to_json(const ExperimentConfig& c) {
    json ring{{"round_trip_time", c.ring.round_trip_time},
              {"gain_db", c.ring.gain_db},
              {"v_low", c.ring.v_low},
              {"v_high", c.ring.v_high},
              {"attenuation_span_db", c.ring.attenuation_span_db},
              {"sat_amplitude", c.ring.sat_amplitude},
              {"relax_time", c.ring.relax_time},
              {"noise_rms", c.ring.noise_rms},
              {"initial_amplitude", c.ring.initial_amplitude},
              {"dt", c.ring.dt},
              {"diode", diode_name(c.ring.diode)},
              {"model", model_name(c.ring.model)}};
    const char* dataset = c.dataset.kind == DatasetKind::synthetic       ? "synthetic"
                          : c.dataset.kind == DatasetKind::wav_directory ? "wav_directory"
                                                                         : "manifest";
    return json{{"ring", ring},
                {"preroll_round_trips", c.preroll_round_trips},
                {"theta_grid", c.theta_grid},
                {"gain_grid", c.gain_grid},
                {"series_length", c.series_length},
                {"binary_samples", c.binary_samples},
                {"split", {{"washout", c.split.washout}, {"train", c.split.train}, {"test", c.split.test}}},
                {"capacity",
                 {{"max_delay", c.capacity.max_delay},
                  {"include_zero_delay", c.capacity.include_zero_delay},
                  {"ridge", c.capacity.readout.ridge}}},
                {"digit_interval", c.digit_interval},
                {"neurons", c.neurons},
                {"samples_per_neuron", c.samples_per_neuron},
                {"digit_readout", {{"ridge", c.digit_readout.ridge}, {"bias", c.digit_readout.bias}}},
                {"normalization", c.normalization == NormalizationScope::unit ? "unit" : "digit"},
                {"dataset",
                 {{"kind", dataset},
                  {"path", c.dataset.path.string()},
                  {"speakers", c.dataset.synth.speakers},
                  {"utterances", c.dataset.synth.utterances}}},
                {"folds", c.folds},
                {"seeds",
                 {{"mask", c.seeds.mask}, {"series", c.seeds.series}, {"noise", c.seeds.noise}, {"corpus", c.seeds.corpus}}},
                {"execution", c.execution == Execution::parallel ? "parallel" : "serial"}};
}

// ---------------------------------------------------------------------------

std::vector<SweepPoint> sweep_points(const ExperimentConfig& config) {
    std::vector<SweepPoint> points;
    for (double theta : config.theta_grid)
        for (double gain : config.gain_grid) points.push_back({theta, gain});
    return points;
}

std::vector<SweepResult> run_sweep(const ExperimentConfig& config) {
    config.validate();
    SweepSettings settings;
    settings.ring = config.ring;
    settings.samples = config.binary_samples;
    settings.split = config.split;
    settings.capacity = config.capacity;
    settings.preroll_time = config.preroll_time();
    settings.noise_seed = config.seeds.noise;
    const BinarySeries series = gen_binary(config.series_length, config.seeds.series);
    const auto points = sweep_points(config);
    return sweep_capacities(settings, series, points, config.execution);
}

Corpus load_corpus(const ExperimentConfig& config) {
    switch (config.dataset.kind) {
        case DatasetKind::synthetic: {
            SynthOptions opts = config.dataset.synth;
            opts.seed = config.seeds.corpus;
            return synth_corpus(opts);
        }
        case DatasetKind::wav_directory:
            return load_wav_directory(config.dataset.path);
        case DatasetKind::manifest:
            return load_manifest(config.dataset.path);
    }
    throw ConfigError("unknown dataset kind");
}

void validate_corpus(const Corpus& corpus, std::size_t folds) {
    if (corpus.empty()) throw InputError("corpus is empty");
    std::map<std::tuple<std::string, int, int>, int> counts;
    std::set<std::string> speakers;
    for (const auto& s : corpus) {
        if (s.samples.empty()) throw InputError("empty waveform: " + s.source);
        counts[{s.speaker, s.label, s.utterance}] += 1;
        speakers.insert(s.speaker);
    }
    std::vector<std::string> problems;
    for (const auto& spk : speakers) {
        for (int d = 0; d < 10; ++d) {
            for (int u = 0; u < static_cast<int>(folds); ++u) {
                const auto it = counts.find({spk, d, u});
                const int n = it == counts.end() ? 0 : it->second;
                if (n == 0) problems.push_back(fmt::format("missing speaker={} digit={} utterance={}", spk, d, u));
                if (n > 1) problems.push_back(fmt::format("duplicate speaker={} digit={} utterance={} ({}x)", spk, d, u, n));
            }
        }
    }
    for (const auto& [key, n] : counts) {
        const int u = std::get<2>(key);
        if (u < 0 || u >= static_cast<int>(folds)) {
            problems.push_back(fmt::format("utterance {} of speaker={} digit={} outside 0..{}", u, std::get<0>(key),
                                           std::get<1>(key), folds - 1));
        }
    }
    if (!problems.empty()) {
        std::string msg = fmt::format("corpus must hold exactly {} utterances per (speaker, digit); {} problem(s):",
                                      folds, problems.size());
        for (std::size_t i = 0; i < problems.size() && i < 50; ++i) msg += "\n  " + problems[i];
        if (problems.size() > 50) msg += "\n  ...";
        throw InputError(msg);
    }
}

DigitExperiment run_digits(const ExperimentConfig& config, const Corpus& corpus) {
    config.validate();
    validate_corpus(corpus, config.folds);

    DigitExperiment result;
    result.corpus_hash = corpus_hash(corpus);
    result.folds = make_folds(corpus, config.folds);
    const auto features = features_with_cache(config, corpus, result.corpus_hash);
    const MaskMatrix mask = make_mask(config.neurons, kFeatureCount, config.seeds.mask);
    const auto inputs = corpus_inputs(features, mask, config.normalization, config.execution);

    std::size_t units = 0;
    for (const auto& x : inputs) units += static_cast<std::size_t>(x.cols());
    result.sound_units = units;
    Eigen::MatrixXd all(static_cast<Eigen::Index>(config.neurons), static_cast<Eigen::Index>(units));
    Eigen::Index col = 0;
    for (const auto& x : inputs) {
        all.middleCols(col, x.cols()) = x;
        col += x.cols();
    }

    std::size_t n_all = 1;
    for (auto n : config.samples_per_neuron) n_all = std::lcm(n_all, n);
    const OutputMatrix states = run_reservoir(all, config.digit_interval, n_all, config.ring, config.seeds.noise,
                                              ReservoirOptions{config.preroll_time()});

    const auto labels = labels_of(corpus);
    std::vector<std::size_t> ns = config.samples_per_neuron;
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    for (std::size_t n : ns) {
        const OutputMatrix sub = states.subsample(n);
        std::vector<Eigen::MatrixXd> per_digit;
        per_digit.reserve(inputs.size());
        Eigen::Index c = 0;
        for (const auto& x : inputs) {
            per_digit.push_back(sub.values.middleCols(c, x.cols()));
            c += x.cols();
        }
        AccuracyPoint p;
        p.samples_per_neuron = n;
        p.dimension = n * config.neurons;
        p.folds = cross_validate(per_digit, labels, result.folds, config.digit_readout, config.execution);
        std::tie(p.mean, p.stddev) = mean_std(p.folds);
        result.points.push_back(std::move(p));
        if (n == ns.back()) result.readout = full_readout(per_digit, labels, config, result.corpus_hash, n);
    }
    return result;
}

DigitExperiment run_baseline(const ExperimentConfig& config, const Corpus& corpus) {
    config.validate();
    validate_corpus(corpus, config.folds);

    DigitExperiment result;
    result.corpus_hash = corpus_hash(corpus);
    result.folds = make_folds(corpus, config.folds);
    const auto features = features_with_cache(config, corpus, result.corpus_hash);
    const MaskMatrix mask = make_mask(config.neurons, kFeatureCount, config.seeds.mask);
    const auto inputs = corpus_inputs(features, mask, config.normalization, config.execution);
    for (const auto& x : inputs) result.sound_units += static_cast<std::size_t>(x.cols());

    AccuracyPoint p;
    p.samples_per_neuron = 0;
    p.dimension = config.neurons;
    const auto labels = labels_of(corpus);
    p.folds = cross_validate(inputs, labels, result.folds, config.digit_readout, config.execution);
    std::tie(p.mean, p.stddev) = mean_std(p.folds);
    result.points.push_back(std::move(p));
    result.readout = full_readout(inputs, labels, config, result.corpus_hash, 0);
    return result;
}

// ---------------------------------------------------------------------------

RunReport cmd_sweep(const ExperimentConfig& config) {
    return timed("sweep", config, [&](RunReport& report) {
        const auto results = run_sweep(config);
        auto out = open_output(config.output_dir / "capacities.csv");
        out << "theta_int,gain_db,c_stm,c_pc\n";
        json points = json::array();
        for (const auto& r : results) {
            if (r.ok()) {
                out << num(r.point.interval) << ',' << num(r.point.gain_db) << ',' << num(r.stm.capacity) << ','
                    << num(r.pc.capacity) << '\n';
                points.push_back({{"theta_int", r.point.interval},
                                  {"gain_db", r.point.gain_db},
                                  {"stm", capacity_json(r.stm)},
                                  {"pc", capacity_json(r.pc)}});
            } else {
                out << num(r.point.interval) << ',' << num(r.point.gain_db) << ",nan,nan\n";
                points.push_back({{"theta_int", r.point.interval}, {"gain_db", r.point.gain_db}, {"error", r.error}});
                report.failed = true;
            }
        }
        report.json["results"] = {{"points", points}};
        report.json["device_reference"] = device_reference();
    });
}

RunReport cmd_digits(const ExperimentConfig& config) {
    return timed("digits", config, [&](RunReport& report) {
        const Corpus corpus = load_corpus(config);
        const DigitExperiment result = run_digits(config, corpus);
        write_accuracy(result, config.output_dir);
        report.json["results"] = digits_json(result);
        report.json["device_reference"] = device_reference();
    });
}

RunReport cmd_baseline(const ExperimentConfig& config) {
    return timed("baseline", config, [&](RunReport& report) {
        const Corpus corpus = load_corpus(config);
        const DigitExperiment result = run_baseline(config, corpus);
        write_accuracy(result, config.output_dir);
        report.json["results"] = digits_json(result);
        report.json["device_reference"] = device_reference();
    });
}

RunReport cmd_simulate(const ExperimentConfig& config, const SimulateRequest& request) {
    return timed("simulate", config, [&](RunReport& report) {
        std::ifstream in(request.drive_file);
        if (!in) throw InputError("cannot open drive file " + request.drive_file.string());
        std::vector<double> values;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#') continue;
            try {
                values.push_back(std::stod(line.substr(first)));
            } catch (const std::exception&) {
                throw InputError(fmt::format("{}:{}: not a number", request.drive_file.string(), line_no));
            }
        }
        if (values.empty()) throw InputError("drive file holds no values");

        Drive drive;
        if (request.normalized) {
            drive = encode(values, request.interval, config.ring);
        } else {
            drive.interval = request.interval;
            drive.values = values;
        }
        const Trace trace = simulate(drive, config.ring, config.seeds.noise,
                                     SimOptions{config.preroll_time(), std::nullopt});
        auto out = open_output(config.output_dir / "trace.csv");
        out << "time,voltage_in,diode_out\n";
        for (std::size_t i = 0; i < trace.readings.size(); ++i) {
            out << num(static_cast<double>(i + 1) * trace.dt) << ',' << num(trace.voltages[i]) << ','
                << num(trace.readings[i]) << '\n';
        }
        report.json["results"] = {{"steps", trace.readings.size()},
                                  {"intervals", values.size()},
                                  {"final_reading", trace.readings.back()}};
    });
}

RunReport cmd_gen_synthetic(const ExperimentConfig& config) {
    return timed("gen-synthetic", config, [&](RunReport& report) {
        SynthOptions opts = config.dataset.synth;
        opts.seed = config.seeds.corpus;
        const Corpus corpus = synth_corpus(opts);
        auto manifest = open_output(config.output_dir / "manifest.csv");
        manifest << "path,label,speaker,utterance\n";
        for (const auto& s : corpus) {
            const std::string name = fmt::format("{}_{}_{}.wav", s.label, s.speaker, s.utterance);
            write_wav(config.output_dir / name, s.samples, static_cast<int>(kSampleRate));
            manifest << name << ',' << s.label << ',' << s.speaker << ',' << s.utterance << '\n';
        }
        report.json["results"] = {{"samples", corpus.size()},
                                  {"corpus_hash", fmt::format("{:016x}", corpus_hash(corpus))}};
    });
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
    auto out = open_output(dir / "report.json");
    out << report.json.dump(2) << '\n';
}

}  // namespace ringrc
