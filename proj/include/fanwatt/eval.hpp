#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "fanwatt/audio_io.hpp"
#include "fanwatt/error.hpp"
#include "fanwatt/labeling.hpp"
#include "fanwatt/mlp.hpp"
#include "fanwatt/rng.hpp"
#include "fanwatt/spectral.hpp"
#include "fanwatt/synth.hpp"

namespace fanwatt {

struct SplitSpec {
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
    bool stratified = false;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// ceil(train_fraction * n) samples drawn uniformly from the seed; index sets
// come back sorted so downstream batch order is canonical. Stratified mode
// takes round(fraction * count) per class (proportions preserved within one
// sample) and fails if a populated class would vanish from the train side.
inline SplitIndices split_indices(std::size_t n, const SplitSpec& spec,
                                  const std::vector<int>* labels = nullptr) {
    if (n < 2) throw Error(ErrorFamily::invalid_input, "need at least 2 samples to split");
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0) {
        throw Error(ErrorFamily::usage, "train fraction must be in (0, 1)");
    }

    SplitIndices out;
    if (spec.stratified) {
        if (labels == nullptr || labels->size() != n) {
            throw Error(ErrorFamily::invalid_input, "stratified split needs labels");
        }
        std::array<std::vector<std::size_t>, kClassCount> by_class;
        for (std::size_t i = 0; i < n; ++i) {
            int c = (*labels)[i];
            if (c < 1 || c > kClassCount) {
                throw Error(ErrorFamily::invalid_input, "label out of range 1..4");
            }
            by_class[static_cast<std::size_t>(c - 1)].push_back(i);
        }
        Rng rng(spec.seed);
        for (int c = 0; c < kClassCount; ++c) {
            auto& members = by_class[static_cast<std::size_t>(c)];
            if (members.empty()) continue;
            rng.shuffle(members);
            auto take = static_cast<std::size_t>(
                std::llround(spec.train_fraction * static_cast<double>(members.size())));
            if (take == 0) {
                throw Error(ErrorFamily::stratification,
                            std::string("class ") + std::to_string(c + 1) +
                                " would have no training samples");
            }
            take = std::min(take, members.size());
            out.train.insert(out.train.end(), members.begin(),
                             members.begin() + static_cast<std::ptrdiff_t>(take));
            out.test.insert(out.test.end(), members.begin() + static_cast<std::ptrdiff_t>(take),
                            members.end());
        }
    } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        Rng rng(spec.seed);
        rng.shuffle(order);
        // The 1e-9 guard keeps 0.7*10 from ceiling to 8 under floating point.
        auto n_train = static_cast<std::size_t>(
            std::ceil(spec.train_fraction * static_cast<double>(n) - 1e-9));
        n_train = std::min(n_train, n - 1);
        out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
        out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

inline constexpr int kLowSampleThreshold = 5;

struct EvalReport {
    std::array<std::array<std::int64_t, 4>, 4> confusion{};  // [true][predicted]
    double accuracy = 0.0;
    std::array<std::int64_t, 4> per_class_counts{};   // true counts in the test set
    std::array<std::int64_t, 4> train_class_counts{};
    std::array<double, 4> recall{};     // NaN when the class is absent from the test set
    std::array<double, 4> precision{};  // NaN when never predicted
    std::array<bool, 4> low_sample_flag{};
    std::string config_echo;
};

inline EvalReport make_report(const std::vector<int>& true_labels,
                              const std::vector<int>& predicted,
                              const std::array<std::int64_t, 4>& train_class_counts,
                              const std::string& config_echo) {
    if (true_labels.empty() || true_labels.size() != predicted.size()) {
        throw Error(ErrorFamily::invalid_input, "label/prediction size mismatch or empty test set");
    }
    EvalReport report;
    report.train_class_counts = train_class_counts;
    report.config_echo = config_echo;
    std::int64_t correct = 0;
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        int t = true_labels[i], p = predicted[i];
        if (t < 1 || t > 4 || p < 1 || p > 4) {
            throw Error(ErrorFamily::invalid_input, "class index out of range 1..4");
        }
        report.confusion[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(p - 1)]++;
        report.per_class_counts[static_cast<std::size_t>(t - 1)]++;
        if (t == p) ++correct;
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(true_labels.size());
    for (std::size_t c = 0; c < 4; ++c) {
        std::int64_t row = 0, col = 0;
        for (std::size_t j = 0; j < 4; ++j) {
            row += report.confusion[c][j];
            col += report.confusion[j][c];
        }
        report.recall[c] = row > 0 ? static_cast<double>(report.confusion[c][c]) / static_cast<double>(row)
                                   : std::nan("");
        report.precision[c] = col > 0 ? static_cast<double>(report.confusion[c][c]) / static_cast<double>(col)
                                      : std::nan("");
        // Negative train counts mean "unknown" (model not produced by the
        // training pipeline); no flag in that case.
        report.low_sample_flag[c] = report.train_class_counts[c] >= 0 &&
                                    report.train_class_counts[c] < kLowSampleThreshold;
    }
    return report;
}

inline EvalReport evaluate(const MlpModel& model, const std::vector<FeatureVector>& test_features,
                           const std::vector<int>& true_labels,
                           const std::array<std::int64_t, 4>& train_class_counts = {-1, -1, -1, -1},
                           const std::string& config_echo = "") {
    if (test_features.empty()) {
        throw Error(ErrorFamily::empty_input, "test set is empty");
    }
    std::vector<int> predicted;
    predicted.reserve(test_features.size());
    for (const auto& f : test_features) predicted.push_back(predict(model, f));
    return make_report(true_labels, predicted, train_class_counts, config_echo);
}

// --- pipeline orchestration --------------------------------------------------

struct PipelineConfig {
    BandSpec band;
    Approach approach = Approach::reduced;
    TrainConfig train;
    SplitSpec split;
    bool bounds_from_train_only = false;
    bool equal_frequency_bounds = false;  // quartile cuts instead of equal-width
};

struct LabeledFeatures {
    std::vector<FeatureVector> features;
    std::vector<double> watts;
    double segment_s = 0.0;
    int sample_rate_hz = 0;
};

struct DatasetSpectra {
    std::vector<Spectrum> spectra;
    std::vector<double> watts;
    double segment_s = 0.0;
    int sample_rate_hz = 0;
};

inline DatasetSpectra compute_dataset_spectra(const std::vector<AlignedSegment>& pairs) {
    if (pairs.empty()) throw Error(ErrorFamily::empty_input, "no aligned segments");
    DatasetSpectra out;
    out.spectra.reserve(pairs.size());
    out.watts.reserve(pairs.size());
    out.sample_rate_hz = pairs.front().segment.sample_rate_hz;
    out.segment_s =
        static_cast<double>(pairs.front().segment.samples.size()) / out.sample_rate_hz;
    for (const auto& p : pairs) {
        out.spectra.push_back(dft_magnitudes(p.segment));
        out.watts.push_back(p.watts);
    }
    return out;
}

inline LabeledFeatures features_from_spectra(const DatasetSpectra& spectra, const BandSpec& band,
                                             Approach approach) {
    LabeledFeatures out;
    out.features.reserve(spectra.spectra.size());
    out.watts = spectra.watts;
    out.segment_s = spectra.segment_s;
    out.sample_rate_hz = spectra.sample_rate_hz;
    for (const auto& s : spectra.spectra) {
        out.features.push_back(extract_features(s, band, approach));
    }
    return out;
}

inline LabeledFeatures extract_dataset_features(const std::vector<AlignedSegment>& pairs,
                                                const BandSpec& band, Approach approach) {
    return features_from_spectra(compute_dataset_spectra(pairs), band, approach);
}

struct TrainOutcome {
    MlpModel model;
    std::vector<double> mse_history;
    bool reached_goal = false;
    SplitIndices split;
    std::array<std::int64_t, 4> train_class_counts{};
    std::vector<int> labels;  // one per input sample, from the fitted bounds
};

// The supervised protocol: fit class bounds, split, fit the scaler on the
// train side only, train the network on scaled train features.
inline TrainOutcome train_pipeline(const LabeledFeatures& data, const PipelineConfig& config) {
    TrainOutcome outcome;

    auto fit = [&](const std::vector<double>& watts) {
        return config.equal_frequency_bounds ? fit_bounds_equal_frequency(watts)
                                             : fit_bounds(watts);
    };

    ClassBounds bounds;
    SplitIndices split;
    if (config.bounds_from_train_only) {
        // Split first on provisional whole-trace labels, then refit bounds on
        // the train wattages only.
        ClassBounds provisional = fit(data.watts);
        std::vector<int> labels(data.watts.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            labels[i] = classify_watts(data.watts[i], provisional);
        }
        split = split_indices(data.watts.size(), config.split, &labels);
        std::vector<double> train_watts;
        for (auto i : split.train) train_watts.push_back(data.watts[i]);
        bounds = fit(train_watts);
    } else {
        bounds = fit(data.watts);
        std::vector<int> labels(data.watts.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            labels[i] = classify_watts(data.watts[i], bounds);
        }
        split = split_indices(data.watts.size(), config.split, &labels);
    }

    outcome.labels.resize(data.watts.size());
    for (std::size_t i = 0; i < data.watts.size(); ++i) {
        outcome.labels[i] = classify_watts(data.watts[i], bounds);
    }

    std::vector<FeatureVector> train_features;
    train_features.reserve(split.train.size());
    for (auto i : split.train) train_features.push_back(data.features[i]);
    FeatureScaler scaler = fit_feature_scaler(train_features);

    Eigen::MatrixXd inputs(train_features.front().values.size(), train_features.size());
    Eigen::MatrixXd targets(2, train_features.size());
    for (std::size_t j = 0; j < split.train.size(); ++j) {
        std::vector<double> scaled = scaler.apply(train_features[j].values);
        for (std::size_t i = 0; i < scaled.size(); ++i) {
            inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scaled[i];
        }
        TargetCode code = encode(outcome.labels[split.train[j]]);
        targets(0, static_cast<Eigen::Index>(j)) = code[0];
        targets(1, static_cast<Eigen::Index>(j)) = code[1];
        outcome.train_class_counts[static_cast<std::size_t>(outcome.labels[split.train[j]] - 1)]++;
    }

    TrainResult trained = train_network(inputs, targets, config.train);
    outcome.model.net = trained.net;
    outcome.model.scaler = scaler;
    outcome.model.bounds = bounds;
    outcome.model.band = config.band;
    outcome.model.approach = config.approach;
    outcome.model.segment_s = data.segment_s;
    outcome.model.sample_rate_hz = data.sample_rate_hz;
    outcome.model.train_class_counts = outcome.train_class_counts;
    outcome.mse_history = trained.mse_history;
    outcome.reached_goal = trained.reached_goal;
    outcome.split = split;
    return outcome;
}

inline EvalReport evaluate_holdout(const LabeledFeatures& data, const TrainOutcome& outcome,
                                   const std::string& config_echo = "") {
    std::vector<FeatureVector> test_features;
    std::vector<int> test_labels;
    for (auto i : outcome.split.test) {
        test_features.push_back(data.features[i]);
        test_labels.push_back(outcome.labels[i]);
    }
    return evaluate(outcome.model, test_features, test_labels, outcome.train_class_counts,
                    config_echo);
}

// --- experiment matrix --------------------------------------------------------

// The 2x2 grid {full, reduced} x {clean, noisy}, reported in that order:
// full/clean, full/noisy, reduced/clean, reduced/noisy.
struct ExperimentMatrix {
    std::array<EvalReport, 4> reports;
    static const char* cell_name(std::size_t i) {
        static const char* names[4] = {
            "full features, clean room",
            "full features, noisy room",
            "reduced features, clean room",
            "reduced features, noisy room",
        };
        return names[i];
    }
};

inline ExperimentMatrix run_experiment_matrix(const std::vector<AlignedSegment>& clean,
                                              const std::vector<AlignedSegment>& noisy,
                                              PipelineConfig config) {
    // Spectra are the expensive part; compute them once per dataset and share
    // across both feature approaches.
    DatasetSpectra clean_spectra = compute_dataset_spectra(clean);
    DatasetSpectra noisy_spectra = compute_dataset_spectra(noisy);

    ExperimentMatrix matrix;
    std::size_t cell = 0;
    for (Approach approach : {Approach::full, Approach::reduced}) {
        for (const auto* spectra : {&clean_spectra, &noisy_spectra}) {
            PipelineConfig cell_config = config;
            cell_config.approach = approach;
            LabeledFeatures data = features_from_spectra(*spectra, config.band, approach);
            TrainOutcome outcome = train_pipeline(data, cell_config);
            matrix.reports[cell] =
                evaluate_holdout(data, outcome, ExperimentMatrix::cell_name(cell));
            ++cell;
        }
    }
    return matrix;
}

// --- report output -------------------------------------------------------------

inline std::string report_to_text(const EvalReport& report) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof(buf), "accuracy: %.4f\n", report.accuracy);
    out += buf;
    out += "confusion matrix (rows = true class, columns = predicted):\n";
    out += "            pred1   pred2   pred3   pred4\n";
    for (std::size_t t = 0; t < 4; ++t) {
        std::snprintf(buf, sizeof(buf), "  true%zu   %7lld %7lld %7lld %7lld\n", t + 1,
                      static_cast<long long>(report.confusion[t][0]),
                      static_cast<long long>(report.confusion[t][1]),
                      static_cast<long long>(report.confusion[t][2]),
                      static_cast<long long>(report.confusion[t][3]));
        out += buf;
    }
    out += "per-class (test count / train count / recall / precision):\n";
    for (std::size_t c = 0; c < 4; ++c) {
        std::string recall = std::isnan(report.recall[c])
                                 ? std::string("n/a")
                                 : (std::snprintf(buf, sizeof(buf), "%.4f", report.recall[c]), buf);
        std::string precision =
            std::isnan(report.precision[c])
                ? std::string("n/a")
                : (std::snprintf(buf, sizeof(buf), "%.4f", report.precision[c]), buf);
        std::string train_count =
            report.train_class_counts[c] < 0
                ? std::string("n/a")
                : std::to_string(report.train_class_counts[c]);
        std::snprintf(buf, sizeof(buf), "  class %zu (%s): %lld / %s / %s / %s%s\n", c + 1,
                      class_name(static_cast<int>(c + 1)),
                      static_cast<long long>(report.per_class_counts[c]), train_count.c_str(),
                      recall.c_str(), precision.c_str(),
                      report.low_sample_flag[c] ? "  [low training sample count]" : "");
        out += buf;
    }
    if (!report.config_echo.empty()) {
        out += "config: " + report.config_echo + "\n";
    }
    return out;
}

inline nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["accuracy"] = report.accuracy;
    j["confusion"] = report.confusion;
    j["per_class_counts"] = report.per_class_counts;
    j["train_class_counts"] = report.train_class_counts;
    auto nan_safe = [](double v) {
        return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v);
    };
    j["recall"] = {nan_safe(report.recall[0]), nan_safe(report.recall[1]),
                   nan_safe(report.recall[2]), nan_safe(report.recall[3])};
    j["precision"] = {nan_safe(report.precision[0]), nan_safe(report.precision[1]),
                      nan_safe(report.precision[2]), nan_safe(report.precision[3])};
    j["low_sample_flag"] = report.low_sample_flag;
    j["config"] = report.config_echo;
    return j;
}

inline void write_confusion_csv(const EvalReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorFamily::io, "cannot create " + path);
    out << "true\\predicted,1,2,3,4\n";
    for (std::size_t t = 0; t < 4; ++t) {
        out << (t + 1);
        for (std::size_t p = 0; p < 4; ++p) out << "," << report.confusion[t][p];
        out << "\n";
    }
}

inline void write_features_csv(const std::vector<FeatureVector>& features,
                               const std::vector<double>& header_freqs,
                               const std::string& path,
                               const std::string& config_echo = "") {
    std::ofstream out(path);
    if (!out) throw Error(ErrorFamily::io, "cannot create " + path);
    char buf[64];
    if (!config_echo.empty()) out << "# config: " << config_echo << "\n";
    out << "segment";
    for (double f : header_freqs) {
        std::snprintf(buf, sizeof(buf), ",%.6g", f);
        out << buf;
    }
    out << "\n";
    for (std::size_t i = 0; i < features.size(); ++i) {
        out << i;
        for (double v : features[i].values) {
            std::snprintf(buf, sizeof(buf), ",%.17g", v);
            out << buf;
        }
        out << "\n";
    }
}

}  // namespace fanwatt
