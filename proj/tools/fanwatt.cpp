// fanwatt: estimate a server's power-consumption class from fan noise.
//
// Subcommands: synth | extract | train | eval | predict | experiment-matrix.
// Every run prints and/or embeds its fully-resolved configuration so outputs
// are reproducible from the echoed settings alone. All randomness is seeded;
// identical flags and inputs produce byte-identical output files.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fanwatt/audio_io.hpp"
#include "fanwatt/error.hpp"
#include "fanwatt/eval.hpp"
#include "fanwatt/labeling.hpp"
#include "fanwatt/mlp.hpp"
#include "fanwatt/model_io.hpp"
#include "fanwatt/spectral.hpp"
#include "fanwatt/synth.hpp"

namespace {

using nlohmann::json;

// "A:B" -> (A, B)
std::pair<double, double> parse_range(const std::string& text, const char* flag) {
    auto colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw fanwatt::Error(fanwatt::ErrorFamily::usage,
                             std::string(flag) + " expects LOW:HIGH, got '" + text + "'");
    }
    try {
        std::size_t used = 0;
        double lo = std::stod(text.substr(0, colon), &used);
        if (used != colon) throw std::invalid_argument(text);
        std::string rest = text.substr(colon + 1);
        double hi = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument(text);
        return {lo, hi};
    } catch (const std::exception&) {
        throw fanwatt::Error(fanwatt::ErrorFamily::usage,
                             std::string(flag) + " expects LOW:HIGH, got '" + text + "'");
    }
}

std::vector<double> parse_double_list(const std::string& text, const char* flag) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw fanwatt::Error(fanwatt::ErrorFamily::usage,
                                 std::string(flag) + ": '" + item + "' is not a number");
        }
    }
    if (values.empty()) {
        throw fanwatt::Error(fanwatt::ErrorFamily::usage,
                             std::string(flag) + " expects a comma-separated list");
    }
    return values;
}

// "RPM:BLADES:LEVEL" -> interferer fan spec
fanwatt::InterfererSpec parse_tenant(const std::string& text) {
    std::vector<double> parts;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ':')) {
        try {
            parts.push_back(std::stod(item));
        } catch (const std::exception&) {
            parts.clear();
            break;
        }
    }
    if (parts.size() != 3 || parts[0] <= 0 || parts[1] < 1 || parts[2] < 0) {
        throw fanwatt::Error(fanwatt::ErrorFamily::usage,
                             "--extra-tenant expects RPM:BLADES:LEVEL, got '" + text + "'");
    }
    fanwatt::InterfererSpec spec;
    spec.enabled = true;
    spec.rpm = parts[0];
    spec.blade_count = static_cast<int>(parts[1]);
    spec.level = parts[2];
    return spec;
}

// --seed wins over FANWATT_SEED, which wins over 0.
std::uint64_t resolve_seed(const CLI::Option* seed_opt, std::uint64_t flag_value) {
    if (seed_opt->count() > 0) return flag_value;
    const char* env = std::getenv("FANWATT_SEED");
    if (env == nullptr || *env == '\0') return flag_value;
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
        throw fanwatt::Error(fanwatt::ErrorFamily::usage,
                             std::string("FANWATT_SEED is not an integer: '") + env + "'");
    }
    return parsed;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw fanwatt::Error(fanwatt::ErrorFamily::io, "cannot create " + path);
    out << text;
}

json band_json(const fanwatt::BandSpec& band) {
    return {{"low_hz", band.low_hz}, {"high_hz", band.high_hz}, {"bin_width_hz", band.bin_width_hz}};
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
    std::size_t segments = 0;
    double segment_s = 20.0;
    int sample_rate_hz = 16000;
    fanwatt::FanProfile fan;
    fanwatt::RoomProfile room;
    fanwatt::InterfererSpec tenant;
    std::string rpm_range;
    std::string power_range;
    std::string tenant_text;
    std::string pattern = "levels";
    std::string levels_text;
    std::string shares_text;
    std::string watts_text;
    double walk_step = 0.15;
    std::uint64_t seed = 0;
    std::string out_prefix = "synth";
    std::string scenario_path;

    // option handles, for "explicit flag beats scenario file" resolution
    CLI::Option* o_segments = nullptr;
    CLI::Option* o_segment_s = nullptr;
    CLI::Option* o_rate = nullptr;
    CLI::Option* o_blades = nullptr;
    CLI::Option* o_rpm_range = nullptr;
    CLI::Option* o_harmonics = nullptr;
    CLI::Option* o_decay = nullptr;
    CLI::Option* o_ac_cutoff = nullptr;
    CLI::Option* o_ac_level = nullptr;
    CLI::Option* o_noise = nullptr;
    CLI::Option* o_power_range = nullptr;
    CLI::Option* o_tenant = nullptr;
    CLI::Option* o_pattern = nullptr;
    CLI::Option* o_levels = nullptr;
    CLI::Option* o_shares = nullptr;
    CLI::Option* o_watts = nullptr;
    CLI::Option* o_walk_step = nullptr;
    CLI::Option* o_seed = nullptr;
};

void apply_scenario(SynthArgs& a) {
    std::ifstream in(a.scenario_path);
    if (!in) {
        throw fanwatt::Error(fanwatt::ErrorFamily::io, "cannot open " + a.scenario_path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw fanwatt::Error(fanwatt::ErrorFamily::parse, a.scenario_path + ": " + e.what());
    }
    try {
        if (j.contains("segments") && a.o_segments->count() == 0)
            a.segments = j.at("segments").get<std::size_t>();
        if (j.contains("segment_s") && a.o_segment_s->count() == 0)
            a.segment_s = j.at("segment_s").get<double>();
        if (j.contains("sample_rate_hz") && a.o_rate->count() == 0)
            a.sample_rate_hz = j.at("sample_rate_hz").get<int>();
        if (j.contains("seed") && a.o_seed->count() == 0)
            a.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("fan")) {
            const json& f = j.at("fan");
            if (f.contains("blades") && a.o_blades->count() == 0)
                a.fan.blade_count = f.at("blades").get<int>();
            if (f.contains("rpm_min") && a.o_rpm_range->count() == 0)
                a.fan.rpm_min = f.at("rpm_min").get<double>();
            if (f.contains("rpm_max") && a.o_rpm_range->count() == 0)
                a.fan.rpm_max = f.at("rpm_max").get<double>();
            if (f.contains("harmonics") && a.o_harmonics->count() == 0)
                a.fan.harmonics = f.at("harmonics").get<int>();
            if (f.contains("harmonic_decay") && a.o_decay->count() == 0)
                a.fan.harmonic_decay = f.at("harmonic_decay").get<double>();
        }
        if (j.contains("room")) {
            const json& r = j.at("room");
            if (r.contains("ac_cutoff_hz") && a.o_ac_cutoff->count() == 0)
                a.room.ac_cutoff_hz = r.at("ac_cutoff_hz").get<double>();
            if (r.contains("ac_level") && a.o_ac_level->count() == 0)
                a.room.ac_level = r.at("ac_level").get<double>();
            if (r.contains("noise_level") && a.o_noise->count() == 0)
                a.room.broadband_noise_level = r.at("noise_level").get<double>();
            if (r.contains("power_min_w") && a.o_power_range->count() == 0)
                a.room.power_min_w = r.at("power_min_w").get<double>();
            if (r.contains("power_max_w") && a.o_power_range->count() == 0)
                a.room.power_max_w = r.at("power_max_w").get<double>();
        }
        if (j.contains("extra_tenant") && a.o_tenant->count() == 0) {
            const json& t = j.at("extra_tenant");
            a.tenant.enabled = true;
            a.tenant.rpm = t.at("rpm").get<double>();
            a.tenant.blade_count = t.at("blades").get<int>();
            a.tenant.level = t.at("level").get<double>();
        }
        if (j.contains("wattage")) {
            const json& w = j.at("wattage");
            if (w.contains("pattern") && a.o_pattern->count() == 0)
                a.pattern = w.at("pattern").get<std::string>();
            if (w.contains("levels") && a.o_levels->count() == 0) {
                std::string joined;
                for (double v : w.at("levels").get<std::vector<double>>()) {
                    if (!joined.empty()) joined += ',';
                    joined += std::to_string(v);
                }
                a.levels_text = joined;
            }
            if (w.contains("shares") && a.o_shares->count() == 0) {
                std::string joined;
                for (double v : w.at("shares").get<std::vector<double>>()) {
                    if (!joined.empty()) joined += ',';
                    joined += std::to_string(v);
                }
                a.shares_text = joined;
            }
            if (w.contains("watts") && a.o_watts->count() == 0) {
                std::string joined;
                for (double v : w.at("watts").get<std::vector<double>>()) {
                    if (!joined.empty()) joined += ',';
                    joined += std::to_string(v);
                }
                a.watts_text = joined;
            }
            if (w.contains("step_fraction") && a.o_walk_step->count() == 0)
                a.walk_step = w.at("step_fraction").get<double>();
        }
    } catch (const json::exception& e) {
        throw fanwatt::Error(fanwatt::ErrorFamily::parse, a.scenario_path + ": " + e.what());
    }
}

int cmd_synth(SynthArgs& a) {
    if (!a.scenario_path.empty()) apply_scenario(a);
    if (a.o_rpm_range->count() > 0) {
        auto [lo, hi] = parse_range(a.rpm_range, "--rpm-range");
        a.fan.rpm_min = lo;
        a.fan.rpm_max = hi;
    }
    if (a.o_power_range->count() > 0) {
        auto [lo, hi] = parse_range(a.power_range, "--power-range");
        a.room.power_min_w = lo;
        a.room.power_max_w = hi;
    }
    if (a.o_tenant->count() > 0) a.tenant = parse_tenant(a.tenant_text);
    a.seed = resolve_seed(a.o_seed, a.seed);

    if (a.segments == 0) {
        throw fanwatt::Error(fanwatt::ErrorFamily::usage, "--segments must be at least 1");
    }
    if (a.fan.rpm_min <= 0 || a.fan.rpm_max <= a.fan.rpm_min) {
        throw fanwatt::Error(fanwatt::ErrorFamily::usage, "--rpm-range must be increasing and positive");
    }
    if (a.room.power_min_w <= 0 || a.room.power_max_w <= a.room.power_min_w) {
        throw fanwatt::Error(fanwatt::ErrorFamily::usage, "--power-range must be increasing and positive");
    }

    std::vector<double> watts;
    if (a.pattern == "levels") {
        std::vector<double> levels = a.levels_text.empty()
                                         ? fanwatt::equally_spaced_levels(a.room, 4)
                                         : parse_double_list(a.levels_text, "--levels");
        watts = fanwatt::wattage_levels(levels, a.segments);
    } else if (a.pattern == "walk") {
        watts = fanwatt::wattage_random_walk(a.segments, a.room, a.seed, a.walk_step);
    } else if (a.pattern == "shares") {
        std::vector<double> shares = a.shares_text.empty()
                                         ? std::vector<double>{0.25, 0.25, 0.25, 0.25}
                                         : parse_double_list(a.shares_text, "--shares");
        if (shares.size() != 4) {
            throw fanwatt::Error(fanwatt::ErrorFamily::usage, "--shares expects exactly 4 values");
        }
        watts = fanwatt::wattage_class_shares(a.segments, a.room,
                                              {shares[0], shares[1], shares[2], shares[3]}, a.seed);
    } else if (a.pattern == "explicit") {
        watts = parse_double_list(a.watts_text, "--watts");
        if (watts.size() != a.segments) {
            throw fanwatt::Error(fanwatt::ErrorFamily::usage,
                                 "--watts length must equal --segments");
        }
    } else {
        throw fanwatt::Error(fanwatt::ErrorFamily::usage,
                             "--pattern must be one of levels|walk|shares|explicit");
    }

    fanwatt::SynthResult result = fanwatt::synth_dataset(a.fan, a.room, watts, a.segment_s,
                                                         a.sample_rate_hz, a.seed, a.tenant);

    json echo{
        {"command", "synth"},
        {"segments", a.segments},
        {"segment_s", a.segment_s},
        {"sample_rate_hz", a.sample_rate_hz},
        {"seed", a.seed},
        {"fan",
         {{"blades", a.fan.blade_count},
          {"rpm_min", a.fan.rpm_min},
          {"rpm_max", a.fan.rpm_max},
          {"harmonics", a.fan.harmonics},
          {"harmonic_decay", a.fan.harmonic_decay}}},
        {"room",
         {{"ac_cutoff_hz", a.room.ac_cutoff_hz},
          {"ac_level", a.room.ac_level},
          {"noise_level", a.room.broadband_noise_level},
          {"power_min_w", a.room.power_min_w},
          {"power_max_w", a.room.power_max_w}}},
        {"pattern", a.pattern},
        {"walk_step", a.walk_step},
        {"out_prefix", a.out_prefix},
    };
    if (a.tenant.enabled) {
        echo["extra_tenant"] = {{"rpm", a.tenant.rpm},
                                {"blades", a.tenant.blade_count},
                                {"level", a.tenant.level}};
    }

    fanwatt::write_wav(a.out_prefix + ".wav", result.signal.samples, a.sample_rate_hz);
    fanwatt::write_power_csv(a.out_prefix + ".csv", result.trace);
    write_text_file(a.out_prefix + ".config.json", echo.dump(2) + "\n");

    std::printf("wrote %s.wav (%zu samples, %.1f s), %s.csv (%zu readings), %s.config.json\n",
                a.out_prefix.c_str(), result.signal.samples.size(), result.signal.duration_s(),
                a.out_prefix.c_str(), result.trace.readings.size(), a.out_prefix.c_str());
    return 0;
}

// -------------------------------------------------------------- extract ----

struct ExtractArgs {
    std::string wav_path;
    std::string power_csv;
    std::string approach = "reduced";
    std::string band_text = "166:700";
    double bin_width = 15.0;
    double segment_s = 20.0;
    double offset_s = 0.0;
    std::string out_path = "features.csv";
};

int cmd_extract(const ExtractArgs& a) {
    fanwatt::BandSpec band;
    std::tie(band.low_hz, band.high_hz) = parse_range(a.band_text, "--band");
    band.bin_width_hz = a.bin_width;
    fanwatt::Approach approach = fanwatt::approach_from_name(a.approach);

    fanwatt::AudioSignal signal = fanwatt::read_wav(a.wav_path);
    std::vector<fanwatt::AudioSegment> segments;
    double segment_s = a.segment_s;
    if (!a.power_csv.empty()) {
        fanwatt::PowerTrace trace = fanwatt::read_power_csv(a.power_csv);
        auto pairs = fanwatt::segment_and_align(signal, trace, a.offset_s);
        segments.reserve(pairs.size());
        for (auto& p : pairs) segments.push_back(std::move(p.segment));
        segment_s = trace.interval_s;
    } else {
        segments = fanwatt::segment_signal(signal, a.segment_s, a.offset_s);
    }

    std::vector<fanwatt::FeatureVector> features;
    features.reserve(segments.size());
    for (const auto& seg : segments) {
        features.push_back(
            fanwatt::extract_features(fanwatt::dft_magnitudes(seg), band, approach));
    }

    // Column headers are the stable nominal frequencies (bin centers for the
    // reduced approach, the DFT grid for the full one), not the per-segment
    // argmax locations.
    std::size_t n = segments.front().samples.size();
    std::vector<double> header;
    if (approach == fanwatt::Approach::reduced) {
        for (const auto& bin : fanwatt::bin_layout(signal.sample_rate_hz, n, band)) {
            header.push_back(bin.nominal_center_hz);
        }
    } else {
        auto [k_lo, k_hi] = fanwatt::band_indices(signal.sample_rate_hz, n, band);
        double df = static_cast<double>(signal.sample_rate_hz) / static_cast<double>(n);
        for (std::size_t k = k_lo; k <= k_hi; ++k) header.push_back(static_cast<double>(k) * df);
    }

    json echo{{"command", "extract"},     {"wav", a.wav_path},
              {"power_csv", a.power_csv}, {"approach", a.approach},
              {"band", band_json(band)},  {"segment_s", segment_s},
              {"offset_s", a.offset_s},   {"out", a.out_path}};
    fanwatt::write_features_csv(features, header, a.out_path, echo.dump());
    std::printf("wrote %s: %zu segments x %zu features\n", a.out_path.c_str(), features.size(),
                features.front().values.size());
    return 0;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
    std::string wav_path;
    std::string power_csv;
    std::string approach = "reduced";
    std::string band_text = "166:700";
    double bin_width = 15.0;
    int epochs = 1000;
    double goal_error = 1e-4;
    double lr = 0.01;
    std::uint64_t seed = 0;
    double train_frac = 0.7;
    bool stratified = false;
    bool bounds_from_train = false;
    bool equal_frequency = false;
    std::string hidden_text;
    double offset_s = 0.0;
    std::string model_out = "model.json";
    std::string log_out = "train_log.csv";
    std::string report_out;
    CLI::Option* o_seed = nullptr;
};

int cmd_train(TrainArgs& a) {
    a.seed = resolve_seed(a.o_seed, a.seed);

    fanwatt::PipelineConfig config;
    std::tie(config.band.low_hz, config.band.high_hz) = parse_range(a.band_text, "--band");
    config.band.bin_width_hz = a.bin_width;
    config.approach = fanwatt::approach_from_name(a.approach);
    config.train.max_epochs = a.epochs;
    config.train.goal_error = a.goal_error;
    config.train.learning_rate = a.lr;
    config.train.seed = a.seed;
    config.split.train_fraction = a.train_frac;
    config.split.seed = a.seed;
    config.split.stratified = a.stratified;
    config.bounds_from_train_only = a.bounds_from_train;
    config.equal_frequency_bounds = a.equal_frequency;
    if (!a.hidden_text.empty()) {
        auto [k1, k2] = parse_range(a.hidden_text, "--hidden");
        if (k1 < 1 || k2 < 1 || k1 != std::floor(k1) || k2 != std::floor(k2)) {
            throw fanwatt::Error(fanwatt::ErrorFamily::usage,
                                 "--hidden expects positive integers K1:K2");
        }
        config.train.hidden1 = static_cast<int>(k1);
        config.train.hidden2 = static_cast<int>(k2);
    }

    fanwatt::AudioSignal signal = fanwatt::read_wav(a.wav_path);
    fanwatt::PowerTrace trace = fanwatt::read_power_csv(a.power_csv);
    auto pairs = fanwatt::segment_and_align(signal, trace, a.offset_s);
    fanwatt::LabeledFeatures data =
        fanwatt::extract_dataset_features(pairs, config.band, config.approach);
    fanwatt::TrainOutcome outcome = fanwatt::train_pipeline(data, config);

    json echo{{"command", "train"},
              {"wav", a.wav_path},
              {"power_csv", a.power_csv},
              {"approach", a.approach},
              {"band", band_json(config.band)},
              {"epochs", a.epochs},
              {"goal_error", a.goal_error},
              {"learning_rate", a.lr},
              {"seed", a.seed},
              {"train_fraction", a.train_frac},
              {"stratified", a.stratified},
              {"bounds_from_train", a.bounds_from_train},
              {"equal_frequency", a.equal_frequency},
              {"offset_s", a.offset_s},
              {"segments", pairs.size()},
              {"model_out", a.model_out}};

    const fanwatt::NetworkShape& shape = outcome.model.net.shape;
    std::ostringstream log;
    log << "# config: " << echo.dump() << "\n";
    log << "# network: m=" << shape.inputs << " k1=" << shape.hidden1 << " k2=" << shape.hidden2
        << " outputs=" << shape.outputs << "\n";
    log << "epoch,mse\n";
    char line[64];
    for (std::size_t e = 0; e < outcome.mse_history.size(); ++e) {
        std::snprintf(line, sizeof(line), "%zu,%.17g\n", e, outcome.mse_history[e]);
        log << line;
    }
    write_text_file(a.log_out, log.str());

    fanwatt::save_model(outcome.model, a.model_out);

    fanwatt::EvalReport report = fanwatt::evaluate_holdout(data, outcome, echo.dump());
    if (!a.report_out.empty()) {
        write_text_file(a.report_out, fanwatt::report_to_json(report).dump(2) + "\n");
    }

    std::printf("network: m=%d k1=%d k2=%d\n", shape.inputs, shape.hidden1, shape.hidden2);
    std::printf("trained %zu epochs, final mse %.6g, goal %s\n", outcome.mse_history.size(),
                outcome.mse_history.back(), outcome.reached_goal ? "reached" : "not reached");
    std::printf("holdout report (%zu train / %zu test):\n%s", outcome.split.train.size(),
                outcome.split.test.size(), fanwatt::report_to_text(report).c_str());
    std::printf("wrote %s, %s\n", a.model_out.c_str(), a.log_out.c_str());
    return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
    std::string wav_path;
    std::string power_csv;
    std::string model_path;
    double offset_s = 0.0;
    std::string report_out;
    std::string confusion_out;
};

int cmd_eval(const EvalArgs& a) {
    fanwatt::MlpModel model = fanwatt::load_model(a.model_path);
    fanwatt::AudioSignal signal = fanwatt::read_wav(a.wav_path);
    fanwatt::PowerTrace trace = fanwatt::read_power_csv(a.power_csv);
    auto pairs = fanwatt::segment_and_align(signal, trace, a.offset_s);

    std::vector<fanwatt::FeatureVector> features;
    std::vector<int> labels;
    features.reserve(pairs.size());
    for (const auto& p : pairs) {
        features.push_back(
            fanwatt::extract_features(fanwatt::dft_magnitudes(p.segment), model.band,
                                      model.approach));
        labels.push_back(fanwatt::classify_watts(p.watts, model.bounds));
    }

    json echo{{"command", "eval"},       {"wav", a.wav_path},
              {"power_csv", a.power_csv}, {"model", a.model_path},
              {"offset_s", a.offset_s},   {"segments", pairs.size()},
              {"approach", fanwatt::approach_name(model.approach)},
              {"band", band_json(model.band)}};

    fanwatt::EvalReport report =
        fanwatt::evaluate(model, features, labels, model.train_class_counts, echo.dump());
    if (!a.report_out.empty()) {
        write_text_file(a.report_out, fanwatt::report_to_json(report).dump(2) + "\n");
    }
    if (!a.confusion_out.empty()) {
        fanwatt::write_confusion_csv(report, a.confusion_out);
    }
    std::fputs(fanwatt::report_to_text(report).c_str(), stdout);
    return 0;
}

// -------------------------------------------------------------- predict ----

struct PredictArgs {
    std::string wav_path;
    std::string model_path;
    double offset_s = 0.0;
};

int cmd_predict(const PredictArgs& a) {
    fanwatt::MlpModel model = fanwatt::load_model(a.model_path);
    fanwatt::AudioSignal signal = fanwatt::read_wav(a.wav_path);
    if (signal.sample_rate_hz != model.sample_rate_hz) {
        std::fprintf(stderr,
                     "note: wav sample rate %d Hz differs from the model's %d Hz; band logic is "
                     "frequency-driven and proceeds\n",
                     signal.sample_rate_hz, model.sample_rate_hz);
    }
    auto segments = fanwatt::segment_signal(signal, model.segment_s, a.offset_s);

    std::printf("segment,class,label\n");
    for (std::size_t k = 0; k < segments.size(); ++k) {
        fanwatt::FeatureVector f = fanwatt::extract_features(
            fanwatt::dft_magnitudes(segments[k]), model.band, model.approach);
        int cls = fanwatt::predict(model, f);
        std::printf("%zu,%d,%s\n", k, cls, fanwatt::class_name(cls));
    }
    return 0;
}

// ----------------------------------------------------- experiment-matrix ----

struct MatrixArgs {
    std::string clean_wav, clean_csv, noisy_wav, noisy_csv;
    std::string band_text = "166:700";
    double bin_width = 15.0;
    int epochs = 1000;
    double goal_error = 1e-4;
    double lr = 0.01;
    std::uint64_t seed = 0;
    double train_frac = 0.7;
    bool stratified = false;
    double offset_s = 0.0;
    std::string report_out = "matrix.json";
    std::string text_out;
    CLI::Option* o_seed = nullptr;
};

int cmd_matrix(MatrixArgs& a) {
    a.seed = resolve_seed(a.o_seed, a.seed);

    fanwatt::PipelineConfig config;
    std::tie(config.band.low_hz, config.band.high_hz) = parse_range(a.band_text, "--band");
    config.band.bin_width_hz = a.bin_width;
    config.train.max_epochs = a.epochs;
    config.train.goal_error = a.goal_error;
    config.train.learning_rate = a.lr;
    config.train.seed = a.seed;
    config.split.train_fraction = a.train_frac;
    config.split.seed = a.seed;
    config.split.stratified = a.stratified;

    auto load_pairs = [&](const std::string& wav, const std::string& csv) {
        fanwatt::AudioSignal signal = fanwatt::read_wav(wav);
        fanwatt::PowerTrace trace = fanwatt::read_power_csv(csv);
        return fanwatt::segment_and_align(signal, trace, a.offset_s);
    };
    auto clean = load_pairs(a.clean_wav, a.clean_csv);
    auto noisy = load_pairs(a.noisy_wav, a.noisy_csv);

    fanwatt::ExperimentMatrix matrix = fanwatt::run_experiment_matrix(clean, noisy, config);

    json echo{{"command", "experiment-matrix"},
              {"clean_wav", a.clean_wav},
              {"clean_csv", a.clean_csv},
              {"noisy_wav", a.noisy_wav},
              {"noisy_csv", a.noisy_csv},
              {"band", band_json(config.band)},
              {"epochs", a.epochs},
              {"goal_error", a.goal_error},
              {"learning_rate", a.lr},
              {"seed", a.seed},
              {"train_fraction", a.train_frac},
              {"stratified", a.stratified},
              {"offset_s", a.offset_s}};

    json out{{"config", echo}, {"cells", json::array()}};
    std::string text;
    for (std::size_t i = 0; i < matrix.reports.size(); ++i) {
        json cell = fanwatt::report_to_json(matrix.reports[i]);
        cell["name"] = fanwatt::ExperimentMatrix::cell_name(i);
        out["cells"].push_back(cell);
        char line[128];
        std::snprintf(line, sizeof(line), "%-32s accuracy %.4f\n",
                      fanwatt::ExperimentMatrix::cell_name(i), matrix.reports[i].accuracy);
        text += line;
    }
    write_text_file(a.report_out, out.dump(2) + "\n");
    if (!a.text_out.empty()) write_text_file(a.text_out, text);
    std::fputs(text.c_str(), stdout);
    std::printf("wrote %s\n", a.report_out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"power-class estimation from server fan noise"};
    app.require_subcommand(1);

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic recording + power trace");
    synth_args.o_segments =
        synth->add_option("--segments", synth_args.segments, "number of power-trace segments")
            ->check(CLI::PositiveNumber);
    synth_args.o_segment_s =
        synth->add_option("--segment-s", synth_args.segment_s, "segment length in seconds")
            ->check(CLI::PositiveNumber);
    synth_args.o_rate = synth->add_option("--rate", synth_args.sample_rate_hz, "sample rate in Hz")
                            ->check(CLI::PositiveNumber);
    synth_args.o_blades = synth->add_option("--blades", synth_args.fan.blade_count,
                                            "server fan blade count")
                              ->check(CLI::Range(5, 7));
    synth_args.o_rpm_range =
        synth->add_option("--rpm-range", synth_args.rpm_range, "fan speed range MIN:MAX in RPM");
    synth_args.o_harmonics = synth->add_option("--harmonics", synth_args.fan.harmonics,
                                               "overtones above the blade-pass fundamental")
                                 ->check(CLI::Range(1, 16));
    synth_args.o_decay = synth->add_option("--harmonic-decay", synth_args.fan.harmonic_decay,
                                           "amplitude ratio between successive overtones")
                             ->check(CLI::Range(0.01, 0.99));
    synth_args.o_ac_cutoff = synth->add_option("--ac-cutoff", synth_args.room.ac_cutoff_hz,
                                               "AC noise cutoff frequency in Hz")
                                 ->check(CLI::PositiveNumber);
    synth_args.o_ac_level = synth->add_option("--ac-level", synth_args.room.ac_level,
                                              "AC noise RMS relative to the fan tone")
                                ->check(CLI::NonNegativeNumber);
    synth_args.o_noise = synth->add_option("--noise-level", synth_args.room.broadband_noise_level,
                                           "broadband noise RMS relative to the fan tone")
                             ->check(CLI::NonNegativeNumber);
    synth_args.o_power_range = synth->add_option("--power-range", synth_args.power_range,
                                                 "server power range MIN:MAX in watts");
    synth_args.o_tenant = synth->add_option(
        "--extra-tenant", synth_args.tenant_text,
        "second fixed-speed fan as RPM:BLADES:LEVEL (emulates a neighboring tenant)");
    synth_args.o_pattern = synth->add_option("--pattern", synth_args.pattern,
                                             "wattage script: levels|walk|shares|explicit");
    synth_args.o_levels =
        synth->add_option("--levels", synth_args.levels_text, "wattage levels W1,W2,... (cycled)");
    synth_args.o_shares = synth->add_option("--shares", synth_args.shares_text,
                                            "class share weights S1,S2,S3,S4");
    synth_args.o_watts =
        synth->add_option("--watts", synth_args.watts_text, "explicit wattage per segment");
    synth_args.o_walk_step = synth->add_option("--walk-step", synth_args.walk_step,
                                               "random-walk step as a fraction of the power range")
                                 ->check(CLI::Range(0.001, 1.0));
    synth_args.o_seed = synth->add_option("--seed", synth_args.seed, "random seed");
    synth->add_option("--out-prefix", synth_args.out_prefix, "output path prefix");
    synth->add_option("--scenario", synth_args.scenario_path,
                      "JSON scenario file; explicit flags override its values");

    ExtractArgs extract_args;
    CLI::App* extract = app.add_subcommand("extract", "dump spectral features to CSV");
    extract->add_option("--wav", extract_args.wav_path, "input WAV recording")->required();
    extract->add_option("--power-csv", extract_args.power_csv,
                        "power trace CSV; sets the segment length when given");
    extract->add_option("--approach", extract_args.approach, "full|reduced")
        ->check(CLI::IsMember({"full", "reduced"}));
    extract->add_option("--band", extract_args.band_text, "analysis band LOW:HIGH in Hz");
    extract->add_option("--bin-width", extract_args.bin_width, "reduction bin width in Hz")
        ->check(CLI::PositiveNumber);
    extract->add_option("--segment-s", extract_args.segment_s,
                        "segment length in seconds (without --power-csv)")
        ->check(CLI::PositiveNumber);
    extract->add_option("--offset-s", extract_args.offset_s,
                        "audio lead time to skip before the first segment")
        ->check(CLI::NonNegativeNumber);
    extract->add_option("--out", extract_args.out_path, "output features CSV")->required();

    TrainArgs train_args;
    CLI::App* train = app.add_subcommand("train", "train a classifier from WAV + power CSV");
    train->add_option("--wav", train_args.wav_path, "input WAV recording")->required();
    train->add_option("--power-csv", train_args.power_csv, "power trace CSV")->required();
    train->add_option("--approach", train_args.approach, "full|reduced")
        ->check(CLI::IsMember({"full", "reduced"}));
    train->add_option("--band", train_args.band_text, "analysis band LOW:HIGH in Hz");
    train->add_option("--bin-width", train_args.bin_width, "reduction bin width in Hz")
        ->check(CLI::PositiveNumber);
    train->add_option("--epochs", train_args.epochs, "maximum training epochs")
        ->check(CLI::PositiveNumber);
    train->add_option("--goal-error", train_args.goal_error, "MSE stopping threshold")
        ->check(CLI::PositiveNumber);
    train->add_option("--lr", train_args.lr, "gradient-descent learning rate")
        ->check(CLI::PositiveNumber);
    train_args.o_seed = train->add_option("--seed", train_args.seed, "random seed");
    train->add_option("--train-frac", train_args.train_frac, "training fraction of the split");
    train->add_flag("--stratified", train_args.stratified, "stratify the split by class");
    train->add_flag("--bounds-from-train", train_args.bounds_from_train,
                    "fit class bounds on the training wattages only");
    train->add_flag("--equal-frequency", train_args.equal_frequency,
                    "class cuts at wattage quartiles instead of equal-width intervals");
    train->add_option("--hidden", train_args.hidden_text,
                      "override hidden layer sizes K1:K2 (default: derived from input size)");
    train->add_option("--offset-s", train_args.offset_s,
                      "audio lead time to skip before the first segment")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--model-out", train_args.model_out, "output model file");
    train->add_option("--log-out", train_args.log_out, "output training log (epoch,mse)");
    train->add_option("--report-out", train_args.report_out, "optional holdout report JSON");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "evaluate a model on a labeled recording");
    eval->add_option("--wav", eval_args.wav_path, "input WAV recording")->required();
    eval->add_option("--power-csv", eval_args.power_csv, "power trace CSV")->required();
    eval->add_option("--model", eval_args.model_path, "model file from train")->required();
    eval->add_option("--offset-s", eval_args.offset_s,
                     "audio lead time to skip before the first segment")
        ->check(CLI::NonNegativeNumber);
    eval->add_option("--report-out", eval_args.report_out, "output report JSON");
    eval->add_option("--confusion-out", eval_args.confusion_out, "output confusion matrix CSV");

    PredictArgs predict_args;
    CLI::App* predict = app.add_subcommand("predict", "print one class label per segment");
    predict->add_option("--wav", predict_args.wav_path, "input WAV recording")->required();
    predict->add_option("--model", predict_args.model_path, "model file from train")->required();
    predict->add_option("--offset-s", predict_args.offset_s,
                        "audio lead time to skip before the first segment")
        ->check(CLI::NonNegativeNumber);

    MatrixArgs matrix_args;
    CLI::App* matrix = app.add_subcommand(
        "experiment-matrix", "train + evaluate {full,reduced} x {clean,noisy} in one run");
    matrix->add_option("--clean-wav", matrix_args.clean_wav, "clean-room WAV")->required();
    matrix->add_option("--clean-csv", matrix_args.clean_csv, "clean-room power CSV")->required();
    matrix->add_option("--noisy-wav", matrix_args.noisy_wav, "noisy-room WAV")->required();
    matrix->add_option("--noisy-csv", matrix_args.noisy_csv, "noisy-room power CSV")->required();
    matrix->add_option("--band", matrix_args.band_text, "analysis band LOW:HIGH in Hz");
    matrix->add_option("--bin-width", matrix_args.bin_width, "reduction bin width in Hz")
        ->check(CLI::PositiveNumber);
    matrix->add_option("--epochs", matrix_args.epochs, "maximum training epochs")
        ->check(CLI::PositiveNumber);
    matrix->add_option("--goal-error", matrix_args.goal_error, "MSE stopping threshold")
        ->check(CLI::PositiveNumber);
    matrix->add_option("--lr", matrix_args.lr, "gradient-descent learning rate")
        ->check(CLI::PositiveNumber);
    matrix_args.o_seed = matrix->add_option("--seed", matrix_args.seed, "random seed");
    matrix->add_option("--train-frac", matrix_args.train_frac, "training fraction of the split");
    matrix->add_flag("--stratified", matrix_args.stratified, "stratify the split by class");
    matrix->add_option("--offset-s", matrix_args.offset_s,
                       "audio lead time to skip before the first segment")
        ->check(CLI::NonNegativeNumber);
    matrix->add_option("--report-out", matrix_args.report_out, "output report JSON");
    matrix->add_option("--text-out", matrix_args.text_out, "optional summary text file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(fanwatt::ErrorFamily::usage);
    }

    try {
        if (app.got_subcommand(synth)) return cmd_synth(synth_args);
        if (app.got_subcommand(extract)) return cmd_extract(extract_args);
        if (app.got_subcommand(train)) return cmd_train(train_args);
        if (app.got_subcommand(eval)) return cmd_eval(eval_args);
        if (app.got_subcommand(predict)) return cmd_predict(predict_args);
        if (app.got_subcommand(matrix)) return cmd_matrix(matrix_args);
    } catch (const fanwatt::Error& e) {
        std::fprintf(stderr, "error (%s): %s\n", fanwatt::family_name(e.family()),
                     e.message().c_str());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return static_cast<int>(fanwatt::ErrorFamily::internal);
    }
    return 0;
}
