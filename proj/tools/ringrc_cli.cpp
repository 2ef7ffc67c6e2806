// ringrc: command-line front end for the spin-wave ring reservoir simulator.
//
//   ringrc sweep          STM / PC capacities over (theta_int, gain)
//   ringrc digits         spoken-digit accuracy vs. reservoir size
//   ringrc baseline       same pipeline with the reservoir removed
//   ringrc simulate       raw diode trace for a drive file
//   ringrc gen-synthetic  write the synthetic corpus as WAV + manifest

#include "ringrc/errors.hpp"
#include "ringrc/experiment.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <string>

namespace {

using ringrc::ExperimentConfig;

ExperimentConfig preset_config(const std::string& name) {
    if (name == "full") return ExperimentConfig::defaults();
    if (name == "ci") return ExperimentConfig::ci_preset();
    if (name == "desk") return ExperimentConfig::desk_preset();
    throw ringrc::ConfigError("unknown preset '" + name + "' (full, ci, desk)");
}

// The preset decides every default below, so it is read before the real
// parse: from argv first, else from a preset= line in the config file.
std::string find_preset(int argc, char** argv) {
    std::optional<std::string> preset;
    std::string config;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--preset" && i + 1 < argc) preset = argv[i + 1];
        if (a.rfind("--preset=", 0) == 0) preset = a.substr(9);
        if (a == "--config" && i + 1 < argc) config = argv[i + 1];
        if (a.rfind("--config=", 0) == 0) config = a.substr(9);
    }
    if (!preset && !config.empty()) {
        std::ifstream in(config);
        static const std::regex line(R"re(^\s*preset\s*=\s*"?([A-Za-z]+)"?\s*$)re");
        std::smatch m;
        for (std::string l; std::getline(in, l);)
            if (std::regex_match(l, m, line)) preset = m[1];
    }
    return preset.value_or("full");
}

int run(int argc, char** argv) {
    const std::string preset = find_preset(argc, argv);
    ExperimentConfig cfg = preset_config(preset);

    CLI::App app{"Spin-wave active ring reservoir simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "TOML/INI file with option values (command line wins)");
    app.add_option("--preset", "Default set: full, ci, desk")->default_val(preset);

    std::string out = cfg.output_dir.string();
    app.add_option("-o,--out", out, "Output directory")->capture_default_str();
    bool serial = false;
    app.add_flag("--serial", serial, "Run the serial reference kernels");

    // ring
    double round_trip = cfg.ring.round_trip_time;
    int dt_divisor = static_cast<int>(std::lround(cfg.ring.round_trip_time / cfg.ring.dt));
    std::optional<double> tau;
    app.add_option("--round-trip", round_trip, "Round-trip time T_r [s]")->capture_default_str()->group("Ring");
    app.add_option("--dt-divisor", dt_divisor, "Integration steps per round trip")->capture_default_str()->group("Ring");
    app.add_option("--tau", tau, "Relaxation time [s] (default T_r/10)")->group("Ring");
    app.add_option("--gain-db", cfg.ring.gain_db, "Loop gain at v_high above threshold [dB]")
        ->capture_default_str()->group("Ring");
    app.add_option("--v-low", cfg.ring.v_low, "[V]")->capture_default_str()->group("Ring");
    app.add_option("--v-high", cfg.ring.v_high, "[V]")->capture_default_str()->group("Ring");
    app.add_option("--span-db", cfg.ring.attenuation_span_db, "Switch attenuation span [dB]")
        ->capture_default_str()->group("Ring");
    app.add_option("--sat-amplitude", cfg.ring.sat_amplitude)->capture_default_str()->group("Ring");
    app.add_option("--noise-rms", cfg.ring.noise_rms)->capture_default_str()->group("Ring");
    app.add_option("--initial-amplitude", cfg.ring.initial_amplitude)->capture_default_str()->group("Ring");
    std::map<std::string, ringrc::DiodeLaw> diodes{{"amplitude", ringrc::DiodeLaw::amplitude},
                                                   {"power", ringrc::DiodeLaw::power}};
    app.add_option("--diode", cfg.ring.diode, "amplitude | power")
        ->transform(CLI::CheckedTransformer(diodes, CLI::ignore_case))->group("Ring");
    std::map<std::string, ringrc::RingModel> models{{"full", ringrc::RingModel::full},
                                                    {"linearized", ringrc::RingModel::linearized}};
    app.add_option("--model", cfg.ring.model, "full | linearized")
        ->transform(CLI::CheckedTransformer(models, CLI::ignore_case))->group("Ring");
    app.add_option("--preroll", cfg.preroll_round_trips, "Settling time before the input [round trips]")
        ->capture_default_str()->group("Ring");

    // binary tasks
    std::vector<double> thetas;
    std::pair<int, int> theta_range{1, 9};
    bool dense = false;
    app.add_option("--theta", thetas, "Explicit theta_int values [s]")->delimiter(',')->group("Sweep");
    app.add_option("--theta-range", theta_range, "m range for theta = (m + 1/4) T_r")
        ->capture_default_str()->delimiter(',')->group("Sweep");
    app.add_flag("--dense-theta", dense, "Add m T_r and (m + 1/2) T_r points")->group("Sweep");
    app.add_option("--gains", cfg.gain_grid, "Gain grid [dB]")->capture_default_str()->delimiter(',')->group("Sweep");
    app.add_option("--series-length", cfg.series_length)->capture_default_str()->group("Sweep");
    app.add_option("--binary-samples", cfg.binary_samples, "Samples per input step")
        ->capture_default_str()->group("Sweep");
    app.add_option("--washout", cfg.split.washout)->capture_default_str()->group("Sweep");
    app.add_option("--train", cfg.split.train)->capture_default_str()->group("Sweep");
    app.add_option("--test", cfg.split.test)->capture_default_str()->group("Sweep");
    app.add_option("--max-delay", cfg.capacity.max_delay)->capture_default_str()->group("Sweep");
    app.add_flag("--include-zero-delay", cfg.capacity.include_zero_delay)->group("Sweep");
    app.add_option("--capacity-ridge", cfg.capacity.readout.ridge)->capture_default_str()->group("Sweep");

    // digits
    std::optional<double> digit_interval;
    app.add_option("--theta-int", digit_interval, "Digit-task input interval [s] (default 8.25 T_r)")
        ->group("Digits");
    app.add_option("--neurons", cfg.neurons, "Virtual neurons N_theta")->capture_default_str()->group("Digits");
    app.add_option("--samples-per-neuron", cfg.samples_per_neuron)->capture_default_str()->delimiter(',')->group("Digits");
    app.add_option("--ridge", cfg.digit_readout.ridge, "Readout ridge (0 = pseudo-inverse)")
        ->capture_default_str()->group("Digits");
    app.add_flag("--bias", cfg.digit_readout.bias, "Add a bias row to the readout")->group("Digits");
    std::map<std::string, ringrc::NormalizationScope> scopes{{"unit", ringrc::NormalizationScope::unit},
                                                             {"digit", ringrc::NormalizationScope::digit}};
    app.add_option("--normalization", cfg.normalization, "unit | digit")
        ->transform(CLI::CheckedTransformer(scopes, CLI::ignore_case))->group("Digits");
    std::string wav_dir, manifest, cache;
    auto* wav_opt = app.add_option("--wav-dir", wav_dir, "Directory of <digit>_<speaker>_<utt>.wav")
                        ->check(CLI::ExistingDirectory)->group("Digits");
    app.add_option("--manifest", manifest, "CSV path,label,speaker,utterance")
        ->check(CLI::ExistingFile)->excludes(wav_opt)->group("Digits");
    app.add_option("--speakers", cfg.dataset.synth.speakers, "Synthetic corpus speakers")
        ->capture_default_str()->group("Digits");
    app.add_option("--utterances", cfg.dataset.synth.utterances, "Synthetic corpus utterances per digit")
        ->capture_default_str()->group("Digits");
    app.add_option("--cue-level", cfg.dataset.synth.cue_level)->capture_default_str()->group("Digits");
    app.add_option("--folds", cfg.folds)->capture_default_str()->group("Digits");
    app.add_option("--feature-cache", cache, "Spectral feature cache file")->group("Digits");

    // seeds
    app.add_option("--seed-mask", cfg.seeds.mask)->capture_default_str()->group("Seeds");
    app.add_option("--seed-series", cfg.seeds.series)->capture_default_str()->group("Seeds");
    app.add_option("--seed-noise", cfg.seeds.noise)->capture_default_str()->group("Seeds");
    app.add_option("--seed-corpus", cfg.seeds.corpus)->capture_default_str()->group("Seeds");

    auto* sweep = app.add_subcommand("sweep", "STM / PC capacity sweep");
    auto* digits = app.add_subcommand("digits", "Spoken-digit recognition");
    auto* baseline = app.add_subcommand("baseline", "Digit recognition without the reservoir");
    auto* simulate = app.add_subcommand("simulate", "Raw trace for a drive file");
    auto* synth = app.add_subcommand("gen-synthetic", "Write the synthetic corpus");

    ringrc::SimulateRequest request;
    std::string drive;
    simulate->add_option("drive", drive, "One drive value per line")->required()->check(CLI::ExistingFile);
    simulate->add_option("--interval", request.interval, "Duration of each value [s]")->required();
    simulate->add_flag("--normalized", request.normalized, "Values are in [-1, 1]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    cfg.output_dir = out;
    cfg.execution = serial ? ringrc::Execution::serial : ringrc::Execution::parallel;
    cfg.ring.round_trip_time = round_trip;
    cfg.ring.dt = round_trip / dt_divisor;
    cfg.ring.relax_time = tau.value_or(0.1 * round_trip);
    cfg.digit_interval = digit_interval.value_or(8.25 * round_trip);
    if (!thetas.empty()) {
        cfg.theta_grid = thetas;
    } else {
        cfg.theta_grid = ExperimentConfig::synchronized_grid(round_trip, theta_range.first, theta_range.second);
    }
    if (dense) {
        for (int m = theta_range.first; m <= theta_range.second; ++m) {
            cfg.theta_grid.push_back(m * round_trip);
            cfg.theta_grid.push_back((m + 0.5) * round_trip);
        }
        std::sort(cfg.theta_grid.begin(), cfg.theta_grid.end());
    }
    if (!wav_dir.empty()) {
        cfg.dataset.kind = ringrc::DatasetKind::wav_directory;
        cfg.dataset.path = wav_dir;
    } else if (!manifest.empty()) {
        cfg.dataset.kind = ringrc::DatasetKind::manifest;
        cfg.dataset.path = manifest;
    }
    if (!cache.empty()) cfg.feature_cache = cache;
    request.drive_file = drive;

    cfg.validate();
    std::filesystem::create_directories(cfg.output_dir);
    {
        // explicit settings on top of the preset; reload with --config
        std::ofstream dump(cfg.output_dir / "config.ini");
        dump << "preset=\"" << preset << "\"\n";
        for (const CLI::Option* opt : app.get_options()) {
            if (opt->count() == 0 || opt->get_lnames().empty()) continue;
            const std::string name = opt->get_lnames().front();
            if (name == "preset" || name == "config" || name == "help") continue;
            const auto& values = opt->results();
            if (opt->get_type_size() == 0) {
                dump << name << "=true\n";
            } else if (values.size() == 1) {
                dump << name << "=\"" << values.front() << "\"\n";
            } else {
                dump << name << "=[";
                for (std::size_t i = 0; i < values.size(); ++i) dump << (i ? ", " : "") << '"' << values[i] << '"';
                dump << "]\n";
            }
        }
    }

    ringrc::RunReport report;
    if (*sweep) report = ringrc::cmd_sweep(cfg);
    else if (*digits) report = ringrc::cmd_digits(cfg);
    else if (*baseline) report = ringrc::cmd_baseline(cfg);
    else if (*simulate) report = ringrc::cmd_simulate(cfg, request);
    else if (*synth) report = ringrc::cmd_gen_synthetic(cfg);

    fmt::print(stderr, "{}: wrote {} ({:.1f} s)\n", report.command, cfg.output_dir.string(),
               report.json.value("wall_time_seconds", 0.0));
    if (report.failed) {
        fmt::print(stderr, "{}: some points failed, see report.json\n", report.command);
        return 2;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        fmt::print(stderr, "fatal: {}\n", e.what());
        return 2;
    }
}
