#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fanwatt/audio_io.hpp"
#include "fanwatt/error.hpp"
#include "fanwatt/fft.hpp"

namespace fanwatt {

// Non-redundant half spectrum of one real-valued segment.
struct Spectrum {
    std::vector<double> magnitudes;  // |X_k| for k = 0 .. floor(n/2)
    double freq_resolution_hz = 0.0;
    std::size_t n = 0;
    int sample_rate_hz = 0;
};

struct BandSpec {
    double low_hz = 166.0;
    double high_hz = 700.0;
    double bin_width_hz = 15.0;  // 0 disables binning
};

// Which classifier input layout a model was built with: every in-band
// spectral component, or one max-magnitude representative per sub-region.
enum class Approach { full, reduced };

inline const char* approach_name(Approach a) {
    return a == Approach::full ? "full" : "reduced";
}

inline Approach approach_from_name(const std::string& name) {
    if (name == "full") return Approach::full;
    if (name == "reduced") return Approach::reduced;
    throw Error(ErrorFamily::usage, "unknown approach '" + name + "' (full or reduced)");
}

struct FeatureVector {
    std::vector<double> values;
    std::vector<double> center_freqs_hz;
};

inline Spectrum dft_magnitudes(const std::vector<double>& samples, int sample_rate_hz) {
    if (samples.size() < 2) {
        throw Error(ErrorFamily::invalid_input, "need at least 2 samples for a spectrum");
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw Error(ErrorFamily::invalid_input,
                        "non-finite sample at index " + std::to_string(i));
        }
    }
    std::vector<cdouble> full = dft_real(samples);
    Spectrum spectrum;
    spectrum.n = samples.size();
    spectrum.sample_rate_hz = sample_rate_hz;
    spectrum.freq_resolution_hz = static_cast<double>(sample_rate_hz) / static_cast<double>(spectrum.n);
    spectrum.magnitudes.resize(spectrum.n / 2 + 1);
    for (std::size_t k = 0; k < spectrum.magnitudes.size(); ++k) {
        spectrum.magnitudes[k] = std::abs(full[k]);
    }
    return spectrum;
}

inline Spectrum dft_magnitudes(const AudioSegment& segment) {
    return dft_magnitudes(segment.samples, segment.sample_rate_hz);
}

namespace detail {

// Index arithmetic goes through low*n/fs rather than low/(fs/n) so the
// paper-scale configuration lands on exact integers; the 1e-6 guard absorbs
// the one rounding the division can introduce.
inline double band_index_of(double freq_hz, int sample_rate_hz, std::size_t n) {
    return freq_hz * static_cast<double>(n) / static_cast<double>(sample_rate_hz);
}

}  // namespace detail

// Inclusive component index range [k_low, k_high] covering the band.
inline std::pair<std::size_t, std::size_t> band_indices(int sample_rate_hz, std::size_t n,
                                                        const BandSpec& band) {
    if (band.low_hz <= 0.0 || band.low_hz >= band.high_hz) {
        throw Error(ErrorFamily::invalid_input, "band bounds must satisfy 0 < low < high");
    }
    double nyquist = sample_rate_hz / 2.0;
    if (band.high_hz > nyquist) {
        throw Error(ErrorFamily::invalid_input,
                    "band high " + std::to_string(band.high_hz) + " Hz above Nyquist " +
                        std::to_string(nyquist) + " Hz");
    }
    auto k_low = static_cast<std::size_t>(
        std::ceil(detail::band_index_of(band.low_hz, sample_rate_hz, n) - 1e-6));
    auto k_high = static_cast<std::size_t>(
        std::floor(detail::band_index_of(band.high_hz, sample_rate_hz, n) + 1e-6));
    if (k_low > k_high) {
        throw Error(ErrorFamily::invalid_input, "band narrower than one frequency component");
    }
    return {k_low, k_high};
}

// Half-open component index range [begin, end) for each bin-width sub-region
// of the band; the last sub-region is truncated at high_hz (inclusive).
struct BinRange {
    std::size_t k_begin = 0;
    std::size_t k_end = 0;  // exclusive
    double nominal_center_hz = 0.0;
};

inline std::vector<BinRange> bin_layout(int sample_rate_hz, std::size_t n, const BandSpec& band) {
    if (band.bin_width_hz <= 0.0) {
        throw Error(ErrorFamily::invalid_input, "bin width must be positive for binning");
    }
    double resolution = static_cast<double>(sample_rate_hz) / static_cast<double>(n);
    if (band.bin_width_hz < resolution) {
        throw Error(ErrorFamily::invalid_input,
                    "bin width " + std::to_string(band.bin_width_hz) +
                        " Hz is below the frequency resolution " + std::to_string(resolution) +
                        " Hz (degenerate bins)");
    }
    auto [k_low, k_high] = band_indices(sample_rate_hz, n, band);
    auto bin_count = static_cast<std::size_t>(
        std::ceil((band.high_hz - band.low_hz) / band.bin_width_hz - 1e-9));

    std::vector<BinRange> bins(bin_count);
    for (std::size_t j = 0; j < bin_count; ++j) {
        double lo = band.low_hz + static_cast<double>(j) * band.bin_width_hz;
        double hi = std::min(band.low_hz + static_cast<double>(j + 1) * band.bin_width_hz,
                             band.high_hz);
        auto begin = static_cast<std::size_t>(
            std::ceil(detail::band_index_of(lo, sample_rate_hz, n) - 1e-6));
        std::size_t end;
        if (j + 1 == bin_count) {
            end = k_high + 1;  // closed top edge
        } else {
            end = static_cast<std::size_t>(
                std::ceil(detail::band_index_of(hi, sample_rate_hz, n) - 1e-6));
        }
        bins[j].k_begin = std::max(begin, k_low);
        bins[j].k_end = std::min(end, k_high + 1);
        bins[j].nominal_center_hz = (lo + hi) / 2.0;
    }
    return bins;
}

// Approach 1: every component of the band, in index order.
inline FeatureVector full_features(const Spectrum& spectrum, const BandSpec& band) {
    auto [k_low, k_high] = band_indices(spectrum.sample_rate_hz, spectrum.n, band);
    if (k_high >= spectrum.magnitudes.size()) {
        throw Error(ErrorFamily::invalid_input, "band exceeds spectrum length");
    }
    FeatureVector features;
    features.values.reserve(k_high - k_low + 1);
    features.center_freqs_hz.reserve(k_high - k_low + 1);
    for (std::size_t k = k_low; k <= k_high; ++k) {
        features.values.push_back(spectrum.magnitudes[k]);
        features.center_freqs_hz.push_back(static_cast<double>(k) * spectrum.freq_resolution_hz);
    }
    return features;
}

// Approach 2: one representative per sub-region, the max-magnitude component
// (lowest index on ties). center_freqs_hz carries the representative's
// frequency, not the sub-region midpoint.
inline FeatureVector reduced_features(const Spectrum& spectrum, const BandSpec& band) {
    auto bins = bin_layout(spectrum.sample_rate_hz, spectrum.n, band);
    if (!bins.empty() && bins.back().k_end > spectrum.magnitudes.size()) {
        throw Error(ErrorFamily::invalid_input, "band exceeds spectrum length");
    }
    FeatureVector features;
    features.values.reserve(bins.size());
    features.center_freqs_hz.reserve(bins.size());
    for (const auto& bin : bins) {
        if (bin.k_begin >= bin.k_end) {
            // Truncated trailing sub-region with no component on the grid.
            features.values.push_back(0.0);
            features.center_freqs_hz.push_back(bin.nominal_center_hz);
            continue;
        }
        std::size_t best = bin.k_begin;
        for (std::size_t k = bin.k_begin + 1; k < bin.k_end; ++k) {
            if (spectrum.magnitudes[k] > spectrum.magnitudes[best]) best = k;
        }
        features.values.push_back(spectrum.magnitudes[best]);
        features.center_freqs_hz.push_back(static_cast<double>(best) * spectrum.freq_resolution_hz);
    }
    return features;
}

inline FeatureVector extract_features(const Spectrum& spectrum, const BandSpec& band,
                                      Approach approach) {
    return approach == Approach::full ? full_features(spectrum, band)
                                      : reduced_features(spectrum, band);
}

// Per-dimension min-max map onto [0, 1], fit on training data only.
// Zero-range dimensions map to 0; apply clamps out-of-range inputs.
struct FeatureScaler {
    std::vector<double> min;
    std::vector<double> max;

    std::vector<double> apply(const std::vector<double>& values) const {
        if (values.size() != min.size()) {
            throw Error(ErrorFamily::dimension,
                        "feature length " + std::to_string(values.size()) +
                            " does not match scaler dimension " + std::to_string(min.size()));
        }
        std::vector<double> out(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            double range = max[i] - min[i];
            out[i] = range > 0.0 ? std::clamp((values[i] - min[i]) / range, 0.0, 1.0) : 0.0;
        }
        return out;
    }
};

inline FeatureScaler fit_feature_scaler(const std::vector<FeatureVector>& train_features) {
    if (train_features.empty()) {
        throw Error(ErrorFamily::empty_input, "cannot fit scaler on an empty training set");
    }
    std::size_t dim = train_features.front().values.size();
    FeatureScaler scaler;
    scaler.min.assign(dim, 0.0);
    scaler.max.assign(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        scaler.min[i] = train_features.front().values[i];
        scaler.max[i] = train_features.front().values[i];
    }
    for (const auto& f : train_features) {
        if (f.values.size() != dim) {
            throw Error(ErrorFamily::dimension, "inconsistent feature lengths in training set");
        }
        for (std::size_t i = 0; i < dim; ++i) {
            scaler.min[i] = std::min(scaler.min[i], f.values[i]);
            scaler.max[i] = std::max(scaler.max[i], f.values[i]);
        }
    }
    return scaler;
}

}  // namespace fanwatt
