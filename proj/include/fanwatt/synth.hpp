#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "fanwatt/audio_io.hpp"
#include "fanwatt/error.hpp"
#include "fanwatt/rng.hpp"

namespace fanwatt {

// Server cooling fan: data-center fans carry 5 to 7 blades and spin between
// roughly 2000 and 6000 RPM, so the blade-pass tone spans ~166 to 700 Hz.
struct FanProfile {
    int blade_count = 7;
    double rpm_min = 2000.0;
    double rpm_max = 6000.0;
    int harmonics = 3;           // overtones above the fundamental
    double harmonic_decay = 0.5; // amplitude ratio between consecutive overtones
};

// Room acoustics: air-conditioning rumble concentrated below ac_cutoff_hz,
// plus broadband background. Levels are RMS ratios relative to the fan's
// fundamental tone. power_min_w/power_max_w span the server's wattage range.
struct RoomProfile {
    double ac_cutoff_hz = 200.0;
    double ac_level = 0.0;
    double broadband_noise_level = 0.0;
    double power_min_w = 100.0;
    double power_max_w = 300.0;
};

// A second tenant's fan at fixed speed, audible in the same room.
struct InterfererSpec {
    bool enabled = false;
    double rpm = 3500.0;
    int blade_count = 6;
    double level = 0.5;  // amplitude ratio relative to the server fan tone
};

// Dominant tone of a rotating fan: RPM/60 * blade count.
inline double blade_pass_freq(double rpm, int blades) {
    if (rpm <= 0.0 || blades < 1) {
        throw Error(ErrorFamily::invalid_input, "rpm and blade count must be positive");
    }
    return rpm / 60.0 * static_cast<double>(blades);
}

// Monotone affine map from the wattage range onto the fan's speed range;
// wattage outside the range clamps to the endpoints.
inline double power_to_rpm(double watts, const FanProfile& fan, const RoomProfile& room) {
    double t = (watts - room.power_min_w) / (room.power_max_w - room.power_min_w);
    t = std::clamp(t, 0.0, 1.0);
    return fan.rpm_min + t * (fan.rpm_max - fan.rpm_min);
}

namespace detail {

// Cascaded moving-average low-pass; the single-pass response has its first
// null at sample_rate / window, i.e. at the cutoff. The average is circular
// (the signal is treated as periodic), so there is no startup transient and
// the output spectrum is exactly the input spectrum times the window's
// Dirichlet kernel raised to `passes`.
inline void moving_average_lowpass(std::vector<double>& x, int sample_rate_hz, double cutoff_hz,
                                   int passes) {
    const std::size_t n = x.size();
    if (n == 0) return;
    auto window = static_cast<std::size_t>(
        std::max(1L, std::lround(static_cast<double>(sample_rate_hz) / cutoff_hz)));
    window = std::min(window, n);
    for (int p = 0; p < passes; ++p) {
        std::vector<double> out(n, 0.0);
        double acc = 0.0;  // sum over the window (i-window, i] taken mod n
        for (std::size_t j = n - window + 1; j < n; ++j) acc += x[j];
        for (std::size_t i = 0; i < n; ++i) {
            acc += x[i];
            out[i] = acc / static_cast<double>(window);
            acc -= x[(i + n - window + 1) % n];
        }
        x.swap(out);
    }
}

inline double rms(const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return x.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(x.size()));
}

inline constexpr double kToneAmplitude = 0.35;

}  // namespace detail

// One segment's fan tone: fundamental at the blade-pass frequency plus
// `harmonics` overtones with geometrically decaying amplitude. Overtones
// above Nyquist are dropped. Phases come from the segment's substream.
inline std::vector<double> synth_fan_tone(std::size_t n, int sample_rate_hz, double rpm,
                                          const FanProfile& fan, double amplitude, Rng& rng) {
    double f0 = blade_pass_freq(rpm, fan.blade_count);
    std::vector<double> out(n, 0.0);
    for (int h = 0; h <= fan.harmonics; ++h) {
        double freq = f0 * static_cast<double>(h + 1);
        if (freq >= sample_rate_hz / 2.0) break;
        double amp = amplitude * std::pow(fan.harmonic_decay, h);
        double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        double omega = 2.0 * std::numbers::pi * freq / static_cast<double>(sample_rate_hz);
        for (std::size_t i = 0; i < n; ++i) {
            out[i] += amp * std::sin(omega * static_cast<double>(i) + phase);
        }
    }
    return out;
}

// Air-conditioning component: white noise through the cascaded low-pass,
// scaled to the requested RMS. Three passes push the residual energy above
// the cutoff below 1%.
inline std::vector<double> synth_ac_component(std::size_t n, int sample_rate_hz,
                                              double cutoff_hz, double target_rms, Rng& rng) {
    std::vector<double> out(n);
    for (auto& v : out) v = rng.uniform(-1.0, 1.0);
    detail::moving_average_lowpass(out, sample_rate_hz, cutoff_hz, 3);
    double r = detail::rms(out);
    if (r > 0.0) {
        double k = target_rms / r;
        for (auto& v : out) v *= k;
    }
    return out;
}

struct SynthResult {
    AudioSignal signal;
    PowerTrace trace;
};

// Renders one audio segment per wattage reading: the server fan tone at the
// speed the wattage implies, the AC rumble, broadband background, and an
// optional interfering fan. The composite is scaled into [-1, 1] globally so
// relative spectra survive. Fully reproducible from the seed; segment k uses
// substream k.
inline SynthResult synth_dataset(const FanProfile& fan, const RoomProfile& room,
                                 const std::vector<double>& wattages, double interval_s,
                                 int sample_rate_hz, std::uint64_t seed,
                                 const InterfererSpec& interferer = {}) {
    if (wattages.empty()) {
        throw Error(ErrorFamily::empty_input, "no wattages to synthesize");
    }
    if (interval_s <= 0.0 || sample_rate_hz <= 0) {
        throw Error(ErrorFamily::invalid_input, "interval and sample rate must be positive");
    }
    if (room.power_max_w <= room.power_min_w) {
        throw Error(ErrorFamily::invalid_input, "power range must be non-degenerate");
    }

    auto n_per_segment = static_cast<std::size_t>(std::llround(interval_s * sample_rate_hz));
    const double tone_amp = detail::kToneAmplitude;
    const double tone_rms = tone_amp / std::numbers::sqrt2;

    SynthResult result;
    result.signal.sample_rate_hz = sample_rate_hz;
    result.signal.samples.resize(n_per_segment * wattages.size());
    result.trace.interval_s = interval_s;
    result.trace.readings.reserve(wattages.size());

    FanProfile other = fan;
    for (std::size_t k = 0; k < wattages.size(); ++k) {
        // One substream per (segment, component): enabling or disabling one
        // component never changes another component's realization, so a mix
        // decomposes exactly into its parts.
        Rng tone_rng = Rng::substream(seed, k * 4);
        double rpm = power_to_rpm(wattages[k], fan, room);

        std::vector<double> seg = synth_fan_tone(n_per_segment, sample_rate_hz, rpm, fan,
                                                 tone_amp, tone_rng);
        if (room.ac_level > 0.0) {
            Rng ac_rng = Rng::substream(seed, k * 4 + 1);
            std::vector<double> ac = synth_ac_component(n_per_segment, sample_rate_hz,
                                                        room.ac_cutoff_hz,
                                                        room.ac_level * tone_rms, ac_rng);
            for (std::size_t i = 0; i < n_per_segment; ++i) seg[i] += ac[i];
        }
        if (room.broadband_noise_level > 0.0) {
            // Uniform white noise has RMS 1/sqrt(3).
            Rng noise_rng = Rng::substream(seed, k * 4 + 2);
            double k_noise = room.broadband_noise_level * tone_rms * std::numbers::sqrt3;
            for (std::size_t i = 0; i < n_per_segment; ++i) {
                seg[i] += k_noise * noise_rng.uniform(-1.0, 1.0);
            }
        }
        if (interferer.enabled) {
            Rng tenant_rng = Rng::substream(seed, k * 4 + 3);
            other.blade_count = interferer.blade_count;
            std::vector<double> tenant = synth_fan_tone(n_per_segment, sample_rate_hz,
                                                        interferer.rpm, other,
                                                        interferer.level * tone_amp, tenant_rng);
            for (std::size_t i = 0; i < n_per_segment; ++i) seg[i] += tenant[i];
        }

        std::copy(seg.begin(), seg.end(),
                  result.signal.samples.begin() + static_cast<std::ptrdiff_t>(k * n_per_segment));
        result.trace.readings.push_back({static_cast<double>(k) * interval_s, wattages[k]});
    }

    double peak = 0.0;
    for (double s : result.signal.samples) peak = std::max(peak, std::abs(s));
    if (peak > 0.999) {
        double k = 0.999 / peak;
        for (auto& s : result.signal.samples) s *= k;
    }
    for (double s : result.signal.samples) {
        if (std::abs(s) > 1.0) {
            throw Error(ErrorFamily::internal, "sample clipped after normalization");
        }
    }
    return result;
}

// --- wattage patterns -------------------------------------------------------

// Cycles through the given levels; with four equally spaced levels this
// yields one level per power class.
inline std::vector<double> wattage_levels(const std::vector<double>& levels, std::size_t count) {
    if (levels.empty()) throw Error(ErrorFamily::usage, "no wattage levels given");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = levels[i % levels.size()];
    return out;
}

inline std::vector<double> equally_spaced_levels(const RoomProfile& room, int count) {
    std::vector<double> levels(count);
    for (int i = 0; i < count; ++i) {
        levels[i] = room.power_min_w + (room.power_max_w - room.power_min_w) *
                                           static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return levels;
}

// Reflected random walk over the wattage range.
inline std::vector<double> wattage_random_walk(std::size_t count, const RoomProfile& room,
                                               std::uint64_t seed, double step_fraction = 0.15) {
    std::vector<double> out(count);
    Rng rng(seed);
    double span = room.power_max_w - room.power_min_w;
    double w = room.power_min_w + span * rng.uniform01();
    for (std::size_t i = 0; i < count; ++i) {
        w += span * step_fraction * rng.uniform(-1.0, 1.0);
        if (w < room.power_min_w) w = 2.0 * room.power_min_w - w;
        if (w > room.power_max_w) w = 2.0 * room.power_max_w - w;
        w = std::clamp(w, room.power_min_w, room.power_max_w);
        out[i] = w;
    }
    return out;
}

// Exact class counts via largest-remainder apportionment, so a 5% share of 80
// segments is exactly 4 segments, not 4-in-expectation. The first and last
// segments pin power_min/power_max so fitted bounds recover the full range;
// wattages inside each class sit 10% in from the quarter edges.
inline std::vector<double> wattage_class_shares(std::size_t count, const RoomProfile& room,
                                                const std::array<double, 4>& shares,
                                                std::uint64_t seed) {
    if (count < 2) throw Error(ErrorFamily::usage, "need at least 2 segments");
    double total = shares[0] + shares[1] + shares[2] + shares[3];
    if (total <= 0.0) throw Error(ErrorFamily::usage, "class shares must sum to a positive value");
    for (double s : shares) {
        if (s < 0.0) throw Error(ErrorFamily::usage, "class shares must be non-negative");
    }

    std::array<std::size_t, 4> alloc{};
    std::array<double, 4> remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 4; ++c) {
        double quota = shares[c] / total * static_cast<double>(count);
        alloc[c] = static_cast<std::size_t>(quota);
        remainder[c] = quota - static_cast<double>(alloc[c]);
        assigned += alloc[c];
    }
    while (assigned < count) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < 4; ++c) {
            if (remainder[c] > remainder[best]) best = c;
        }
        ++alloc[best];
        remainder[best] = -1.0;
        ++assigned;
    }
    // The pinned endpoints belong to classes 1 and 4, so both need at least
    // one slot; steal from the fullest class that can spare one.
    while (alloc[0] == 0 || alloc[3] == 0) {
        std::size_t edge = alloc[0] == 0 ? 0 : 3;
        std::size_t donor = 4;
        for (std::size_t c = 0; c < 4; ++c) {
            std::size_t floor_c = (c == 0 || c == 3) ? 1 : 0;
            if (alloc[c] > floor_c && (donor == 4 || alloc[c] > alloc[donor])) donor = c;
        }
        --alloc[donor];
        ++alloc[edge];
    }

    std::vector<int> classes;
    classes.reserve(count - 2);
    for (std::size_t c = 0; c < 4; ++c) {
        std::size_t interior = alloc[c] - (c == 0 || c == 3 ? 1 : 0);
        classes.insert(classes.end(), interior, static_cast<int>(c));
    }
    Rng rng(seed);
    rng.shuffle(classes);

    std::vector<double> out(count);
    out[0] = room.power_min_w;
    out[count - 1] = room.power_max_w;
    double quarter = (room.power_max_w - room.power_min_w) / 4.0;
    for (std::size_t i = 1; i + 1 < count; ++i) {
        auto cls = static_cast<double>(classes[i - 1]);
        out[i] = rng.uniform(room.power_min_w + quarter * (cls + 0.1),
                             room.power_min_w + quarter * (cls + 0.9));
    }
    return out;
}

}  // namespace fanwatt
