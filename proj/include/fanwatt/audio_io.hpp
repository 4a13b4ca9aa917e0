#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fanwatt/error.hpp"

namespace fanwatt {

struct AudioSignal {
    std::vector<double> samples;  // amplitudes in [-1, 1]
    int sample_rate_hz = 0;

    double duration_s() const {
        return static_cast<double>(samples.size()) / sample_rate_hz;
    }
};

struct AudioSegment {
    std::vector<double> samples;
    int sample_rate_hz = 0;
    double start_time_s = 0.0;
};

struct PowerReading {
    double timestamp_s = 0.0;
    double watts = 0.0;
};

struct PowerTrace {
    std::vector<PowerReading> readings;
    double interval_s = 0.0;
};

struct AlignedSegment {
    AudioSegment segment;
    double watts = 0.0;
};

enum class WavFormat { pcm16, float32 };

namespace detail {

inline std::uint32_t read_u32le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void put_u32le(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

inline void put_u16le(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace detail

// Reads a RIFF/WAVE file. Supported codecs: 16-bit integer PCM and 32-bit
// IEEE float, per the data this pipeline targets. Multichannel input is
// averaged down to mono with a warning on stderr.
inline AudioSignal read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorFamily::io, "cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());

    auto malformed = [&](std::size_t offset, const std::string& what) -> Error {
        return Error(ErrorFamily::parse,
                     path + ": " + what + " at byte offset " + std::to_string(offset));
    };

    if (bytes.size() < 12) throw malformed(bytes.size(), "truncated RIFF header");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0) throw malformed(0, "missing RIFF tag");
    if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) throw malformed(8, "missing WAVE tag");

    bool have_fmt = false;
    std::uint16_t format_code = 0, channels = 0, bits_per_sample = 0;
    std::uint32_t sample_rate = 0;
    std::size_t data_offset = 0, data_size = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* hdr = bytes.data() + pos;
        std::uint32_t chunk_size = detail::read_u32le(hdr + 4);
        std::size_t body = pos + 8;
        if (body + chunk_size > bytes.size()) throw malformed(pos, "chunk overruns file");
        if (std::memcmp(hdr, "fmt ", 4) == 0) {
            if (chunk_size < 16) throw malformed(pos, "fmt chunk too short");
            const unsigned char* f = bytes.data() + body;
            format_code = detail::read_u16le(f);
            channels = detail::read_u16le(f + 2);
            sample_rate = detail::read_u32le(f + 4);
            bits_per_sample = detail::read_u16le(f + 14);
            have_fmt = true;
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data_offset = body;
            data_size = chunk_size;
        }
        pos = body + chunk_size + (chunk_size & 1);  // chunks are word-aligned
    }

    if (!have_fmt) throw malformed(pos, "no fmt chunk");
    if (data_offset == 0) throw malformed(pos, "no data chunk");
    if (channels == 0) throw malformed(data_offset, "zero channels");
    if (sample_rate == 0) throw malformed(data_offset, "zero sample rate");

    bool pcm16 = (format_code == 1 && bits_per_sample == 16);
    bool ieee32 = (format_code == 3 && bits_per_sample == 32);
    if (!pcm16 && !ieee32) {
        throw Error(ErrorFamily::unsupported_format,
                    path + ": format code " + std::to_string(format_code) + " with " +
                        std::to_string(bits_per_sample) +
                        " bits per sample (supported: 16-bit PCM, 32-bit IEEE float)");
    }

    std::size_t bytes_per_sample = bits_per_sample / 8;
    std::size_t frame_size = bytes_per_sample * channels;
    std::size_t frames = data_size / frame_size;
    if (frames == 0) throw Error(ErrorFamily::empty_input, path + ": data chunk holds no samples");

    if (channels > 1) {
        std::cerr << "warning: " << path << " has " << channels
                  << " channels; averaging to mono\n";
    }

    AudioSignal signal;
    signal.sample_rate_hz = static_cast<int>(sample_rate);
    signal.samples.resize(frames);
    const unsigned char* d = bytes.data() + data_offset;
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const unsigned char* s = d + (i * channels + c) * bytes_per_sample;
            if (pcm16) {
                std::int16_t v = static_cast<std::int16_t>(detail::read_u16le(s));
                acc += static_cast<double>(v) / 32768.0;
            } else {
                float v;
                std::memcpy(&v, s, 4);
                acc += static_cast<double>(v);
            }
        }
        signal.samples[i] = acc / channels;
    }
    for (std::size_t i = 0; i < signal.samples.size(); ++i) {
        if (!std::isfinite(signal.samples[i])) {
            throw Error(ErrorFamily::invalid_input,
                        path + ": non-finite sample at index " + std::to_string(i));
        }
    }
    return signal;
}

// Writes mono audio. pcm16 quantizes with round(x * 32768) clamped to the
// int16 range, which reproduces any value previously read by read_wav
// bit-exactly and keeps quantization error within 1/32768 per sample.
inline void write_wav(const std::string& path, const std::vector<double>& samples,
                      int sample_rate_hz, WavFormat format = WavFormat::pcm16) {
    std::size_t bytes_per_sample = (format == WavFormat::pcm16) ? 2 : 4;
    std::uint32_t data_size = static_cast<std::uint32_t>(samples.size() * bytes_per_sample);

    std::vector<unsigned char> out;
    out.reserve(44 + data_size);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    detail::put_u32le(out, 36 + data_size);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    detail::put_u32le(out, 16);
    detail::put_u16le(out, format == WavFormat::pcm16 ? 1 : 3);
    detail::put_u16le(out, 1);  // mono
    detail::put_u32le(out, static_cast<std::uint32_t>(sample_rate_hz));
    detail::put_u32le(out, static_cast<std::uint32_t>(sample_rate_hz * bytes_per_sample));
    detail::put_u16le(out, static_cast<std::uint16_t>(bytes_per_sample));
    detail::put_u16le(out, static_cast<std::uint16_t>(bytes_per_sample * 8));
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    detail::put_u32le(out, data_size);

    for (double s : samples) {
        if (format == WavFormat::pcm16) {
            long v = std::lround(s * 32768.0);
            v = std::clamp(v, -32768L, 32767L);
            detail::put_u16le(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
        } else {
            float v = static_cast<float>(s);
            unsigned char raw[4];
            std::memcpy(raw, &v, 4);
            out.insert(out.end(), raw, raw + 4);
        }
    }

    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorFamily::io, "cannot create " + path);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) throw Error(ErrorFamily::io, "write failed for " + path);
}

namespace detail {

inline bool parse_double(const std::string& field, double& out) {
    const char* begin = field.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0';
}

}  // namespace detail

// Parses a power trace CSV. Rows are `timestamp_s,watts` or a single watts
// column (timestamps synthesized at default_interval_s). A header row is
// skipped when its first field is not numeric. Spacing must be uniform
// within 1%.
inline PowerTrace read_power_csv(const std::string& path, double default_interval_s = 20.0) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorFamily::io, "cannot open " + path);

    PowerTrace trace;
    std::string line;
    std::size_t row = 0;
    bool single_column = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = line;
        trimmed.erase(0, trimmed.find_first_not_of(" \t"));
        if (trimmed.empty()) continue;

        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }

        double first = 0.0;
        if (!detail::parse_double(fields[0], first)) {
            if (row == 1) continue;  // optional header
            throw Error(ErrorFamily::parse,
                        path + ": non-numeric field at row " + std::to_string(row));
        }

        PowerReading reading;
        if (fields.size() == 1) {
            if (trace.readings.empty()) single_column = true;
            if (!single_column) {
                throw Error(ErrorFamily::parse,
                            path + ": expected 2 columns at row " + std::to_string(row));
            }
            reading.timestamp_s = static_cast<double>(trace.readings.size()) * default_interval_s;
            reading.watts = first;
        } else {
            if (single_column) {
                throw Error(ErrorFamily::parse,
                            path + ": expected 1 column at row " + std::to_string(row));
            }
            double watts = 0.0;
            if (!detail::parse_double(fields[1], watts)) {
                throw Error(ErrorFamily::parse,
                            path + ": non-numeric field at row " + std::to_string(row));
            }
            reading.timestamp_s = first;
            reading.watts = watts;
        }
        if (!std::isfinite(reading.watts) || reading.watts <= 0.0) {
            throw Error(ErrorFamily::invalid_input,
                        path + ": watts must be positive at row " + std::to_string(row));
        }
        trace.readings.push_back(reading);
    }

    if (trace.readings.empty()) throw Error(ErrorFamily::empty_input, path + ": no readings");

    if (trace.readings.size() < 2) {
        trace.interval_s = default_interval_s;
        return trace;
    }
    double interval = trace.readings[1].timestamp_s - trace.readings[0].timestamp_s;
    if (interval <= 0.0) {
        throw Error(ErrorFamily::alignment, path + ": timestamps not strictly increasing");
    }
    for (std::size_t i = 1; i < trace.readings.size(); ++i) {
        double dt = trace.readings[i].timestamp_s - trace.readings[i - 1].timestamp_s;
        if (std::abs(dt - interval) > 0.01 * interval) {
            throw Error(ErrorFamily::alignment,
                        path + ": non-uniform spacing at row " + std::to_string(i + 1) +
                            " (expected " + std::to_string(interval) + " s, got " +
                            std::to_string(dt) + " s)");
        }
    }
    trace.interval_s = interval;
    return trace;
}

inline void write_power_csv(const std::string& path, const PowerTrace& trace) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorFamily::io, "cannot create " + path);
    out << "timestamp_s,watts\n";
    char buf[64];
    for (const auto& r : trace.readings) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", r.timestamp_s, r.watts);
        out << buf;
    }
}

// Full segments per signal: used both by segment_and_align and by callers
// that only need the count.
inline std::size_t full_segment_count(std::size_t total_samples, std::size_t samples_per_segment) {
    return total_samples / samples_per_segment;
}

// Cuts the signal into non-overlapping windows of one power-trace interval
// and pairs window k with reading k. Trailing partial audio is dropped.
// offset_s skips that much leading audio before alignment (recording started
// before the trace).
// Chop a signal into fixed-length segments with no power trace; used by
// feature extraction and prediction on unlabeled recordings.
inline std::vector<AudioSegment> segment_signal(const AudioSignal& signal, double segment_s,
                                                double offset_s = 0.0) {
    if (signal.sample_rate_hz <= 0) {
        throw Error(ErrorFamily::invalid_input, "sample rate must be positive");
    }
    if (segment_s <= 0.0) {
        throw Error(ErrorFamily::usage, "segment length must be positive");
    }
    if (offset_s < 0.0) {
        throw Error(ErrorFamily::usage, "offset-s must be nonnegative");
    }
    double exact = segment_s * signal.sample_rate_hz;
    auto samples_per_segment = static_cast<std::size_t>(std::llround(exact));
    if (samples_per_segment == 0 ||
        std::abs(exact - static_cast<double>(samples_per_segment)) > 1e-6) {
        throw Error(ErrorFamily::invalid_input,
                    "segment of " + std::to_string(segment_s) +
                        " s is not a whole number of samples");
    }
    auto skip = static_cast<std::size_t>(std::llround(offset_s * signal.sample_rate_hz));
    if (skip >= signal.samples.size()) {
        throw Error(ErrorFamily::empty_input, "offset skips the entire signal");
    }
    std::size_t count = full_segment_count(signal.samples.size() - skip, samples_per_segment);
    if (count == 0) {
        throw Error(ErrorFamily::empty_input,
                    "signal shorter than one " + std::to_string(segment_s) + " s segment");
    }
    std::vector<AudioSegment> segments;
    segments.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        AudioSegment seg;
        seg.sample_rate_hz = signal.sample_rate_hz;
        seg.start_time_s = static_cast<double>(k) * segment_s;
        auto begin =
            signal.samples.begin() + static_cast<std::ptrdiff_t>(skip + k * samples_per_segment);
        seg.samples.assign(begin, begin + static_cast<std::ptrdiff_t>(samples_per_segment));
        segments.push_back(std::move(seg));
    }
    return segments;
}

inline std::vector<AlignedSegment> segment_and_align(const AudioSignal& signal,
                                                     const PowerTrace& trace,
                                                     double offset_s = 0.0) {
    if (signal.sample_rate_hz <= 0) {
        throw Error(ErrorFamily::invalid_input, "sample rate must be positive");
    }
    if (trace.interval_s <= 0.0) {
        throw Error(ErrorFamily::invalid_input, "power trace interval must be positive");
    }
    if (offset_s < 0.0) {
        throw Error(ErrorFamily::usage, "offset-s must be nonnegative");
    }

    double exact = trace.interval_s * signal.sample_rate_hz;
    auto samples_per_segment = static_cast<std::size_t>(std::llround(exact));
    if (samples_per_segment == 0 || std::abs(exact - static_cast<double>(samples_per_segment)) > 1e-6) {
        throw Error(ErrorFamily::invalid_input,
                    "interval of " + std::to_string(trace.interval_s) +
                        " s is not a whole number of samples");
    }

    auto skip = static_cast<std::size_t>(std::llround(offset_s * signal.sample_rate_hz));
    if (skip >= signal.samples.size()) {
        throw Error(ErrorFamily::empty_input, "offset skips the entire signal");
    }

    std::size_t available = signal.samples.size() - skip;
    std::size_t count = std::min(full_segment_count(available, samples_per_segment),
                                 trace.readings.size());
    if (count == 0) {
        throw Error(ErrorFamily::empty_input,
                    "signal shorter than one " + std::to_string(trace.interval_s) + " s interval");
    }

    std::vector<AlignedSegment> pairs;
    pairs.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        AlignedSegment pair;
        pair.segment.sample_rate_hz = signal.sample_rate_hz;
        pair.segment.start_time_s = static_cast<double>(k) * trace.interval_s;
        auto begin = signal.samples.begin() + static_cast<std::ptrdiff_t>(skip + k * samples_per_segment);
        pair.segment.samples.assign(begin, begin + static_cast<std::ptrdiff_t>(samples_per_segment));
        pair.watts = trace.readings[k].watts;
        pairs.push_back(std::move(pair));
    }
    return pairs;
}

}  // namespace fanwatt
