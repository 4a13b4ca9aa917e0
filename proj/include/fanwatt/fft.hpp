#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "fanwatt/error.hpp"

namespace fanwatt {

using cdouble = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 transform with a precomputed twiddle table. Size is fixed
// at construction so the table can be shared across calls of the same length
// (Bluestein runs three transforms of one size).
class Fft {
public:
    explicit Fft(std::size_t n) : n_(n) {
        if (!is_power_of_two(n_)) {
            throw Error(ErrorFamily::internal, "Fft size must be a power of two");
        }
        twiddles_.resize(n_ / 2);
        for (std::size_t j = 0; j < n_ / 2; ++j) {
            double ang = -2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_);
            twiddles_[j] = cdouble(std::cos(ang), std::sin(ang));
        }
    }

    std::size_t size() const { return n_; }

    void transform(std::vector<cdouble>& a, bool inverse = false) const {
        if (a.size() != n_) {
            throw Error(ErrorFamily::internal, "Fft buffer size mismatch");
        }
        bit_reverse(a);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            std::size_t stride = n_ / len;
            for (std::size_t i = 0; i < n_; i += len) {
                for (std::size_t j = 0; j < len / 2; ++j) {
                    cdouble w = twiddles_[j * stride];
                    if (inverse) w = std::conj(w);
                    cdouble u = a[i + j];
                    cdouble v = a[i + j + len / 2] * w;
                    a[i + j] = u + v;
                    a[i + j + len / 2] = u - v;
                }
            }
        }
        if (inverse) {
            double scale = 1.0 / static_cast<double>(n_);
            for (auto& z : a) z *= scale;
        }
    }

private:
    void bit_reverse(std::vector<cdouble>& a) const {
        for (std::size_t i = 1, j = 0; i < n_; ++i) {
            std::size_t bit = n_ >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
    }

    std::size_t n_;
    std::vector<cdouble> twiddles_;
};

namespace detail {

// Chirp factor exp(-i*pi*j^2/n). j^2 is reduced mod 2n in exact integer
// arithmetic first, keeping the trig argument in [0, 2*pi) so precision does
// not degrade with j.
inline cdouble chirp(std::uint64_t j, std::uint64_t n) {
    std::uint64_t r = (j % (2 * n)) * (j % (2 * n)) % (2 * n);
    double ang = -std::numbers::pi * static_cast<double>(r) / static_cast<double>(n);
    return cdouble(std::cos(ang), std::sin(ang));
}

}  // namespace detail

// Transform of arbitrary length: radix-2 directly when the length is a power
// of two, Bluestein's chirp-z reduction to a power-of-two convolution
// otherwise. Matches direct summation of X_k = sum x_n e^(-i2pi kn/N).
inline std::vector<cdouble> dft(const std::vector<cdouble>& x) {
    std::size_t n = x.size();
    if (n == 0) return {};
    if (n == 1) return x;

    if (is_power_of_two(n)) {
        std::vector<cdouble> a = x;
        Fft(n).transform(a);
        return a;
    }

    std::size_t m = next_power_of_two(2 * n - 1);
    Fft fft(m);

    std::vector<cdouble> a(m, cdouble(0.0, 0.0));
    std::vector<cdouble> b(m, cdouble(0.0, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        cdouble c = detail::chirp(j, n);
        a[j] = x[j] * c;
        b[j] = std::conj(c);
        if (j != 0) b[m - j] = std::conj(c);
    }

    fft.transform(a);
    fft.transform(b);
    for (std::size_t j = 0; j < m; ++j) a[j] *= b[j];
    fft.transform(a, /*inverse=*/true);

    std::vector<cdouble> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        out[k] = a[k] * detail::chirp(k, n);
    }
    return out;
}

inline std::vector<cdouble> dft_real(const std::vector<double>& x) {
    std::vector<cdouble> buf(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) buf[i] = cdouble(x[i], 0.0);
    return dft(buf);
}

}  // namespace fanwatt
