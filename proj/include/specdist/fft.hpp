#ifndef SPECDIST_FFT_HPP
#define SPECDIST_FFT_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "specdist/error.hpp"

namespace specdist {

/**
 * Mixed-radix decimation-in-time DFT for arbitrary length n.
 *
 * Computes X(m) = sum_k x(k) exp(-2 pi i k m / n). Every prime factor p of n
 * costs O(n p) so highly composite lengths run in O(n log n); a prime length
 * degrades to the direct O(n^2) sum. Twiddles are evaluated from exact
 * integer phases, never by recurrence.
 */
class FftPlan {
public:
    explicit FftPlan(std::size_t n) : n_(n), twiddle_(n), factors_() {
        for (std::size_t k = 0; k < n_; ++k) {
            const double phase = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_);
            twiddle_[k] = {std::cos(phase), std::sin(phase)};
        }
        std::size_t rest = n_;
        for (std::size_t p : {4u, 2u, 3u, 5u})
            while (rest % p == 0 && rest > 1) {
                factors_.push_back(p);
                rest /= p;
            }
        for (std::size_t p = 7; rest > 1; p += 2)
            while (rest % p == 0) {
                factors_.push_back(p);
                rest /= p;
            }
    }

    std::size_t size() const noexcept { return n_; }

    void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out) const {
        if (in.size() != n_ || out.size() != n_)
            throw DimensionError("fft buffer size does not match plan length");
        if (n_ == 0)
            return;
        transform(in.data(), 1, out.data(), n_, 0);
    }

    std::vector<std::complex<double>> forward(std::span<const std::complex<double>> in) const {
        std::vector<std::complex<double>> out(n_);
        forward(in, out);
        return out;
    }

private:
    // W_len^e, where len divides n_.
    std::complex<double> root(std::size_t len, std::size_t e) const {
        return twiddle_[(e % len) * (n_ / len)];
    }

    void transform(const std::complex<double>* in, std::size_t stride, std::complex<double>* out,
                   std::size_t len, std::size_t depth) const {
        if (len == 1) {
            out[0] = in[0];
            return;
        }
        const std::size_t p = factors_[depth];
        const std::size_t m = len / p;
        for (std::size_t r = 0; r < p; ++r)
            transform(in + r * stride, stride * p, out + r * m, m, depth + 1);

        // out currently holds p sub-transforms of length m back to back.
        std::complex<double> local[16];
        std::vector<std::complex<double>> heap;
        std::complex<double>* y = local;
        if (p > 16) {
            heap.resize(p);
            y = heap.data();
        }
        for (std::size_t k = 0; k < m; ++k) {
            for (std::size_t r = 0; r < p; ++r)
                y[r] = out[r * m + k] * root(len, r * k);
            for (std::size_t q = 0; q < p; ++q) {
                std::complex<double> acc = y[0];
                for (std::size_t r = 1; r < p; ++r)
                    acc += y[r] * root(p, r * q);
                out[q * m + k] = acc;
            }
        }
    }

    std::size_t n_;
    std::vector<std::complex<double>> twiddle_;
    std::vector<std::size_t> factors_;
};

} // namespace specdist

#endif // SPECDIST_FFT_HPP
