#include <cmath>
#include <numbers>
#include <vector>

#include "catch_amalgamated.hpp"
#include "fanwatt/spectral.hpp"

using namespace fanwatt;

namespace {

// Spectrum stub with the given size; no transform needed for index logic.
Spectrum make_spectrum(int rate, std::size_t n) {
    Spectrum s;
    s.sample_rate_hz = rate;
    s.n = n;
    s.freq_resolution_hz = static_cast<double>(rate) / static_cast<double>(n);
    s.magnitudes.assign(n / 2 + 1, 0.0);
    return s;
}

}  // namespace

TEST_CASE("half spectrum with exact resolution", "[spectral]") {
    std::vector<double> samples(400, 0.0);
    samples[0] = 1.0;
    Spectrum s = dft_magnitudes(samples, 16000);
    REQUIRE(s.magnitudes.size() == 201);
    REQUIRE(s.freq_resolution_hz == Catch::Approx(40.0));
    REQUIRE(s.n == 400);

    REQUIRE_THROWS_AS(dft_magnitudes(std::vector<double>{1.0}, 16000), Error);
    std::vector<double> bad(16, 0.0);
    bad[3] = std::nan("");
    REQUIRE_THROWS_AS(dft_magnitudes(bad, 16000), Error);
}

TEST_CASE("reference configuration indices are exact", "[spectral]") {
    // 20 s at 16 kHz: resolution 0.05 Hz, 166-700 Hz covers k = 3320..14000.
    const int rate = 16000;
    const std::size_t n = 320000;
    REQUIRE(static_cast<double>(rate) / static_cast<double>(n) == 0.05);

    auto [k_low, k_high] = band_indices(rate, n, BandSpec{});
    REQUIRE(k_low == 3320);
    REQUIRE(k_high == 14000);
    REQUIRE(k_high - k_low + 1 == 10681);

    auto bins = bin_layout(rate, n, BandSpec{});
    REQUIRE(bins.size() == 36);
    REQUIRE(bins.front().k_begin == 3320);
    REQUIRE(bins.back().k_end == 14001);  // exclusive, closes at 14000
    for (std::size_t b = 0; b + 1 < bins.size(); ++b) {
        REQUIRE(bins[b].k_end - bins[b].k_begin == 300);
        REQUIRE(bins[b + 1].k_begin == bins[b].k_end);
    }
    REQUIRE(bins.back().k_end - bins.back().k_begin == 181);
    REQUIRE(bins[0].nominal_center_hz == Catch::Approx(173.5));
}

TEST_CASE("short-segment configuration scales by duration", "[spectral]") {
    // 2 s at 16 kHz: resolution 0.5 Hz, same band covers k = 332..1400.
    auto [k_low, k_high] = band_indices(16000, 32000, BandSpec{});
    REQUIRE(k_low == 332);
    REQUIRE(k_high == 1400);
    REQUIRE(k_high - k_low + 1 == 1069);
    REQUIRE(bin_layout(16000, 32000, BandSpec{}).size() == 36);

    // resolution is set by duration, not rate: 2 s at 8 kHz matches
    auto [k8_low, k8_high] = band_indices(8000, 16000, BandSpec{});
    REQUIRE(k8_high - k8_low + 1 == 1069);
}

TEST_CASE("band validation", "[spectral]") {
    REQUIRE_THROWS_AS(band_indices(16000, 32000, BandSpec{0.0, 700.0, 15.0}), Error);
    REQUIRE_THROWS_AS(band_indices(16000, 32000, BandSpec{700.0, 166.0, 15.0}), Error);
    REQUIRE_THROWS_AS(band_indices(1000, 2000, BandSpec{166.0, 700.0, 15.0}), Error);  // Nyquist
    // bin width below resolution
    REQUIRE_THROWS_AS(bin_layout(16000, 16, BandSpec{2000.0, 7000.0, 15.0}), Error);
}

TEST_CASE("full features copy the in-band grid", "[spectral]") {
    Spectrum s = make_spectrum(16000, 32000);
    for (std::size_t k = 0; k < s.magnitudes.size(); ++k) {
        s.magnitudes[k] = static_cast<double>(k);
    }
    FeatureVector f = full_features(s, BandSpec{});
    REQUIRE(f.values.size() == 1069);
    REQUIRE(f.values.front() == 332.0);
    REQUIRE(f.values.back() == 1400.0);
    REQUIRE(f.center_freqs_hz.front() == Catch::Approx(166.0));
    REQUIRE(f.center_freqs_hz.back() == Catch::Approx(700.0));
}

TEST_CASE("reduced features take the per-bin max with its frequency", "[spectral]") {
    Spectrum s = make_spectrum(16000, 32000);
    // bin 0 covers 166-181 Hz -> k = 332..361; put a spike at k = 350
    s.magnitudes[350] = 7.5;
    // bin 35 covers 691-700 -> k = 1382..1400; spike at the last component
    s.magnitudes[1400] = 3.25;
    FeatureVector f = reduced_features(s, BandSpec{});
    REQUIRE(f.values.size() == 36);
    REQUIRE(f.values[0] == 7.5);
    REQUIRE(f.center_freqs_hz[0] == Catch::Approx(350 * 0.5));
    REQUIRE(f.values[35] == 3.25);
    REQUIRE(f.center_freqs_hz[35] == Catch::Approx(700.0));
    for (std::size_t b = 1; b < 35; ++b) REQUIRE(f.values[b] == 0.0);

    // ties resolve to the lowest index
    s.magnitudes[340] = 7.5;
    FeatureVector tie = reduced_features(s, BandSpec{});
    REQUIRE(tie.center_freqs_hz[0] == Catch::Approx(340 * 0.5));
}

TEST_CASE("extract_features dispatches on approach", "[spectral]") {
    Spectrum s = make_spectrum(16000, 32000);
    REQUIRE(extract_features(s, BandSpec{}, Approach::full).values.size() == 1069);
    REQUIRE(extract_features(s, BandSpec{}, Approach::reduced).values.size() == 36);
    REQUIRE(approach_from_name("full") == Approach::full);
    REQUIRE(approach_from_name(approach_name(Approach::reduced)) == Approach::reduced);
    REQUIRE_THROWS_AS(approach_from_name("medium"), Error);
}

TEST_CASE("scaler maps train range onto [0,1]", "[spectral]") {
    std::vector<FeatureVector> train(3);
    train[0].values = {0.0, 10.0, 5.0};
    train[1].values = {2.0, 20.0, 5.0};
    train[2].values = {4.0, 30.0, 5.0};
    FeatureScaler scaler = fit_feature_scaler(train);

    std::vector<double> mid = scaler.apply({2.0, 15.0, 5.0});
    REQUIRE(mid[0] == Catch::Approx(0.5));
    REQUIRE(mid[1] == Catch::Approx(0.25));
    REQUIRE(mid[2] == 0.0);  // constant column maps to 0

    std::vector<double> clamped = scaler.apply({-5.0, 100.0, 5.0});
    REQUIRE(clamped[0] == 0.0);
    REQUIRE(clamped[1] == 1.0);

    REQUIRE_THROWS_AS(scaler.apply({1.0, 2.0}), Error);
    REQUIRE_THROWS_AS(fit_feature_scaler({}), Error);
}
