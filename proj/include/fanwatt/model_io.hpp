#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fanwatt/error.hpp"
#include "fanwatt/mlp.hpp"

namespace fanwatt {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::vector<double> matrix_to_rows(const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    return flat;
}

inline Eigen::MatrixXd rows_to_matrix(const std::vector<double>& flat, Eigen::Index rows,
                                      Eigen::Index cols) {
    if (flat.size() != static_cast<std::size_t>(rows * cols)) {
        throw Error(ErrorFamily::parse, "weight matrix has wrong element count");
    }
    Eigen::MatrixXd m(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[i++];
    return m;
}

inline Eigen::VectorXd to_vector(const std::vector<double>& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

inline std::vector<double> from_vector(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

}  // namespace detail

// Model files are JSON: a version tag, the network shape, row-major weight
// matrices, biases, the feature scaler, the wattage class bounds, the band,
// and the feature approach. nlohmann serializes doubles with shortest
// round-trip precision, so save/load is exact and byte-stable.
inline nlohmann::json model_to_json(const MlpModel& model) {
    nlohmann::json j;
    j["format_version"] = kModelFormatVersion;
    j["approach"] = approach_name(model.approach);
    j["segment_s"] = model.segment_s;
    j["sample_rate_hz"] = model.sample_rate_hz;
    j["band"] = {{"low_hz", model.band.low_hz},
                 {"high_hz", model.band.high_hz},
                 {"bin_width_hz", model.band.bin_width_hz}};
    j["shape"] = {{"inputs", model.net.shape.inputs},
                  {"hidden1", model.net.shape.hidden1},
                  {"hidden2", model.net.shape.hidden2},
                  {"outputs", model.net.shape.outputs}};
    j["weights"] = {{"w1", detail::matrix_to_rows(model.net.w1)},
                    {"b1", detail::from_vector(model.net.b1)},
                    {"w2", detail::matrix_to_rows(model.net.w2)},
                    {"b2", detail::from_vector(model.net.b2)},
                    {"w3", detail::matrix_to_rows(model.net.w3)},
                    {"b3", detail::from_vector(model.net.b3)}};
    j["scaler"] = {{"min", model.scaler.min}, {"max", model.scaler.max}};
    j["power_bounds"] = {{"min_w", model.bounds.min_w}, {"max_w", model.bounds.max_w}};
    if (model.bounds.has_explicit_cuts) {
        j["power_bounds"]["cuts"] = model.bounds.explicit_cuts;
    }
    j["train_class_counts"] = model.train_class_counts;
    return j;
}

inline void save_model(const MlpModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorFamily::io, "cannot create " + path);
    out << model_to_json(model).dump(2) << "\n";
    if (!out) throw Error(ErrorFamily::io, "write failed for " + path);
}

inline MlpModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorFamily::io, "cannot open " + path);

    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorFamily::parse, path + ": " + e.what());
    }

    try {
        int version = j.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw Error(ErrorFamily::incompatible_model,
                        path + ": format version " + std::to_string(version) +
                            " (this build reads version " +
                            std::to_string(kModelFormatVersion) + ")");
        }

        MlpModel model;
        model.approach = approach_from_name(j.at("approach").get<std::string>());
        model.segment_s = j.at("segment_s").get<double>();
        model.sample_rate_hz = j.at("sample_rate_hz").get<int>();
        const auto& band = j.at("band");
        model.band.low_hz = band.at("low_hz").get<double>();
        model.band.high_hz = band.at("high_hz").get<double>();
        model.band.bin_width_hz = band.at("bin_width_hz").get<double>();
        const auto& shape = j.at("shape");
        model.net.shape.inputs = shape.at("inputs").get<int>();
        model.net.shape.hidden1 = shape.at("hidden1").get<int>();
        model.net.shape.hidden2 = shape.at("hidden2").get<int>();
        model.net.shape.outputs = shape.at("outputs").get<int>();
        if (model.net.shape.inputs < 1 || model.net.shape.hidden1 < 1 ||
            model.net.shape.hidden2 < 1 || model.net.shape.outputs < 1) {
            throw Error(ErrorFamily::parse, path + ": non-positive layer size");
        }
        const auto& w = j.at("weights");
        const auto& s = model.net.shape;
        model.net.w1 = detail::rows_to_matrix(w.at("w1").get<std::vector<double>>(), s.hidden1, s.inputs);
        model.net.w2 = detail::rows_to_matrix(w.at("w2").get<std::vector<double>>(), s.hidden2, s.hidden1);
        model.net.w3 = detail::rows_to_matrix(w.at("w3").get<std::vector<double>>(), s.outputs, s.hidden2);
        model.net.b1 = detail::to_vector(w.at("b1").get<std::vector<double>>());
        model.net.b2 = detail::to_vector(w.at("b2").get<std::vector<double>>());
        model.net.b3 = detail::to_vector(w.at("b3").get<std::vector<double>>());
        if (model.net.b1.size() != s.hidden1 || model.net.b2.size() != s.hidden2 ||
            model.net.b3.size() != s.outputs) {
            throw Error(ErrorFamily::parse, path + ": bias length mismatch");
        }
        model.scaler.min = j.at("scaler").at("min").get<std::vector<double>>();
        model.scaler.max = j.at("scaler").at("max").get<std::vector<double>>();
        if (model.scaler.min.size() != static_cast<std::size_t>(s.inputs) ||
            model.scaler.max.size() != model.scaler.min.size()) {
            throw Error(ErrorFamily::parse, path + ": scaler length mismatch");
        }
        model.bounds.min_w = j.at("power_bounds").at("min_w").get<double>();
        model.bounds.max_w = j.at("power_bounds").at("max_w").get<double>();
        if (j.at("power_bounds").contains("cuts")) {
            auto cuts = j.at("power_bounds").at("cuts").get<std::vector<double>>();
            if (cuts.size() != 3) {
                throw Error(ErrorFamily::parse, path + ": power_bounds.cuts needs 3 entries");
            }
            std::copy(cuts.begin(), cuts.end(), model.bounds.explicit_cuts.begin());
            model.bounds.has_explicit_cuts = true;
        }
        if (j.contains("train_class_counts")) {
            auto counts = j.at("train_class_counts").get<std::vector<std::int64_t>>();
            if (counts.size() != 4) {
                throw Error(ErrorFamily::parse, path + ": train_class_counts needs 4 entries");
            }
            std::copy(counts.begin(), counts.end(), model.train_class_counts.begin());
        }
        if (!model.net.all_finite()) {
            throw Error(ErrorFamily::parse, path + ": non-finite parameters");
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorFamily::parse, path + ": " + e.what());
    }
}

}  // namespace fanwatt
