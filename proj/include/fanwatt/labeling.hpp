#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "fanwatt/audio_io.hpp"
#include "fanwatt/error.hpp"

namespace fanwatt {

inline constexpr int kClassCount = 4;

inline const char* class_name(int index) {
    switch (index) {
        case 1: return "Lowest-Power-Consuming";
        case 2: return "Low-Power-Consuming";
        case 3: return "High-Power-Consuming";
        case 4: return "Highest-Power-Consuming";
    }
    return "invalid";
}

// Equal quarters of the observed wattage range by default; the optional
// equal-frequency fit stores explicit quartile cuts instead.
struct ClassBounds {
    double min_w = 0.0;
    double max_w = 0.0;
    std::array<double, 3> explicit_cuts{};
    bool has_explicit_cuts = false;

    double cut(int j) const {  // j in 1..3
        if (has_explicit_cuts) return explicit_cuts[static_cast<std::size_t>(j - 1)];
        return min_w + static_cast<double>(j) * (max_w - min_w) / 4.0;
    }
};

// Target pair fed to the two output neurons: (1,1) class 1, (-1,1) class 2,
// (1,-1) class 3, (-1,-1) class 4.
using TargetCode = std::array<int, 2>;

inline ClassBounds fit_bounds(const std::vector<double>& watts) {
    if (watts.size() < 2) {
        throw Error(ErrorFamily::invalid_input, "need at least 2 readings to fit class bounds");
    }
    ClassBounds bounds;
    bounds.min_w = watts.front();
    bounds.max_w = watts.front();
    for (double w : watts) {
        bounds.min_w = std::min(bounds.min_w, w);
        bounds.max_w = std::max(bounds.max_w, w);
    }
    if (bounds.min_w == bounds.max_w) {
        throw Error(ErrorFamily::invalid_input,
                    "degenerate range: all readings equal " + std::to_string(bounds.min_w));
    }
    return bounds;
}

inline ClassBounds fit_bounds(const PowerTrace& trace) {
    std::vector<double> watts;
    watts.reserve(trace.readings.size());
    for (const auto& r : trace.readings) watts.push_back(r.watts);
    return fit_bounds(watts);
}

// Optional equal-frequency alternative: cuts at the quartiles so class counts
// come out as balanced as the data allows. Each cut is the midpoint between
// the order statistics either side of the quartile boundary (exactly balanced
// when the count is a multiple of 4).
inline ClassBounds fit_bounds_equal_frequency(std::vector<double> watts) {
    if (watts.size() < kClassCount) {
        throw Error(ErrorFamily::invalid_input,
                    "need at least 4 readings for equal-frequency bounds");
    }
    std::sort(watts.begin(), watts.end());
    ClassBounds bounds;
    bounds.min_w = watts.front();
    bounds.max_w = watts.back();
    bounds.has_explicit_cuts = true;
    std::size_t n = watts.size();
    for (int j = 1; j <= 3; ++j) {
        std::size_t hi = n * static_cast<std::size_t>(j) / 4;
        std::size_t lo = (n * static_cast<std::size_t>(j)) % 4 == 0 ? hi - 1 : hi;
        bounds.explicit_cuts[static_cast<std::size_t>(j - 1)] = (watts[lo] + watts[hi]) / 2.0;
    }
    if (!(bounds.min_w < bounds.explicit_cuts[0] && bounds.explicit_cuts[0] < bounds.explicit_cuts[1] &&
          bounds.explicit_cuts[1] < bounds.explicit_cuts[2] && bounds.explicit_cuts[2] < bounds.max_w)) {
        throw Error(ErrorFamily::invalid_input,
                    "ties in the readings leave fewer than four distinct classes");
    }
    return bounds;
}

// Intervals are right-open except the last; out-of-range wattage clamps to
// the nearest class.
inline int classify_watts(double w, const ClassBounds& bounds) {
    if (!std::isfinite(w)) {
        throw Error(ErrorFamily::invalid_input, "wattage is not finite");
    }
    if (w < bounds.cut(1)) return 1;
    if (w < bounds.cut(2)) return 2;
    if (w < bounds.cut(3)) return 3;
    return 4;
}

inline TargetCode encode(int class_index) {
    switch (class_index) {
        case 1: return {1, 1};
        case 2: return {-1, 1};
        case 3: return {1, -1};
        case 4: return {-1, -1};
    }
    throw Error(ErrorFamily::invalid_input,
                "class index " + std::to_string(class_index) + " out of range 1..4");
}

inline int decode(const TargetCode& code) {
    return 1 + (code[0] < 0 ? 1 : 0) + (code[1] < 0 ? 2 : 0);
}

}  // namespace fanwatt
