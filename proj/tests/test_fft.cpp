#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "catch_amalgamated.hpp"
#include "fanwatt/fft.hpp"
#include "fanwatt/rng.hpp"
#include "oracles.hpp"

using fanwatt::cdouble;
using fanwatt::dft;
using fanwatt::dft_real;

TEST_CASE("power-of-two helpers", "[fft]") {
    REQUIRE(fanwatt::is_power_of_two(1));
    REQUIRE(fanwatt::is_power_of_two(1024));
    REQUIRE_FALSE(fanwatt::is_power_of_two(0));
    REQUIRE_FALSE(fanwatt::is_power_of_two(320000));
    REQUIRE(fanwatt::next_power_of_two(1) == 1);
    REQUIRE(fanwatt::next_power_of_two(5) == 8);
    REQUIRE(fanwatt::next_power_of_two(1024) == 1024);
    REQUIRE(fanwatt::next_power_of_two(639999) == 1048576);
}

TEST_CASE("constant signal concentrates in bin zero", "[fft]") {
    std::vector<double> x(8, 1.0);
    auto spectrum = dft_real(x);
    REQUIRE(std::abs(spectrum[0]) == Catch::Approx(8.0).margin(1e-12));
    for (std::size_t k = 1; k < 8; ++k) {
        REQUIRE(std::abs(spectrum[k]) == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("unit cosine lands at its bin with magnitude N/2", "[fft]") {
    const std::size_t n = 8;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::cos(2.0 * std::numbers::pi * 2.0 * static_cast<double>(i) / static_cast<double>(n));
    }
    auto spectrum = dft_real(x);
    REQUIRE(std::abs(spectrum[2]) == Catch::Approx(4.0).margin(1e-12));
    REQUIRE(std::abs(spectrum[6]) == Catch::Approx(4.0).margin(1e-12));  // mirror
    REQUIRE(std::abs(spectrum[1]) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("impulse has flat unit spectrum", "[fft]") {
    std::vector<double> x(16, 0.0);
    x[0] = 1.0;
    auto spectrum = dft_real(x);
    for (const auto& v : spectrum) REQUIRE(std::abs(v) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("matches direct summation on awkward lengths", "[fft]") {
    fanwatt::Rng rng(17);
    for (std::size_t n : {7ul, 12ul, 100ul, 243ul, 256ul, 1000ul}) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        auto fast = dft_real(x);
        auto slow = oracle::direct_magnitudes(x);
        REQUIRE(fast.size() == n);
        double scale = 0.0;
        for (double m : slow) scale = std::max(scale, m);
        for (std::size_t k = 0; k < n; ++k) {
            REQUIRE(std::abs(fast[k]) ==
                    Catch::Approx(slow[k]).margin(scale * 1e-10).epsilon(1e-10));
        }
    }
}

TEST_CASE("linearity", "[fft]") {
    const std::size_t n = 200;
    fanwatt::Rng rng(23);
    std::vector<cdouble> a(n), b(n), mix(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        b[i] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        mix[i] = 2.0 * a[i] + 3.0 * b[i];
    }
    auto fa = dft(a);
    auto fb = dft(b);
    auto fmix = dft(mix);
    for (std::size_t k = 0; k < n; ++k) {
        REQUIRE(std::abs(fmix[k] - (2.0 * fa[k] + 3.0 * fb[k])) < 1e-9);
    }
}

TEST_CASE("Parseval energy identity", "[fft]") {
    for (std::size_t n : {64ul, 320ul, 1000ul}) {
        fanwatt::Rng rng(n);
        std::vector<double> x(n);
        double time_energy = 0.0;
        for (auto& v : x) {
            v = rng.uniform(-1.0, 1.0);
            time_energy += v * v;
        }
        auto spectrum = dft_real(x);
        double freq_energy = 0.0;
        for (const auto& v : spectrum) freq_energy += std::norm(v);
        freq_energy /= static_cast<double>(n);
        REQUIRE(freq_energy == Catch::Approx(time_energy).epsilon(1e-6));
    }
}

TEST_CASE("inverse transform restores the signal", "[fft]") {
    for (std::size_t n : {64ul, 243ul}) {
        fanwatt::Rng rng(n + 1);
        std::vector<cdouble> x(n);
        for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        if (fanwatt::is_power_of_two(n)) {
            fanwatt::Fft plan(n);
            auto y = x;
            plan.transform(y);
            plan.transform(y, true);
            for (std::size_t i = 0; i < n; ++i) REQUIRE(std::abs(y[i] - x[i]) < 1e-10);
        } else {
            // round trip through the forward transform of the conjugate
            auto y = dft(x);
            for (auto& v : y) v = std::conj(v);
            auto z = dft(y);
            for (std::size_t i = 0; i < n; ++i) {
                REQUIRE(std::abs(std::conj(z[i]) / static_cast<double>(n) - x[i]) < 1e-10);
            }
        }
    }
}

TEST_CASE("degenerate lengths pass through", "[fft]") {
    REQUIRE(dft_real({}).empty());
    auto one = dft_real({3.5});
    REQUIRE(one.size() == 1);
    REQUIRE(one[0] == cdouble(3.5, 0.0));
}
