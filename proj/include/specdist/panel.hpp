#ifndef SPECDIST_PANEL_HPP
#define SPECDIST_PANEL_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "specdist/error.hpp"

namespace specdist {

/// Sample placement for a sliding analysis window.
struct WindowSpec {
    std::size_t width = 128;
    std::size_t stride = 1;

    void validate() const {
        if (width < 2)
            throw InvalidWindowError("window width must be >= 2, got " + std::to_string(width));
        if (stride < 1)
            throw InvalidWindowError("window stride must be >= 1");
    }
};

/**
 * M uniformly sampled real channels of common length L.
 *
 * Immutable after construction. `dt` is the sampling period in minutes and
 * `origin_ms` the UTC timestamp of sample 0. A panel is either empty (L = 0,
 * produced only by zero-length simulations) or has L >= 2.
 */
class SignalPanel {
public:
    SignalPanel(std::vector<std::string> labels, std::vector<std::vector<double>> channels,
                double dt = 1.0, std::int64_t origin_ms = 0)
        : labels_(std::move(labels)), channels_(std::move(channels)), dt_(dt), origin_ms_(origin_ms) {
        if (channels_.empty())
            throw DimensionError("panel needs at least one channel");
        if (labels_.empty())
            for (std::size_t j = 0; j < channels_.size(); ++j)
                labels_.push_back("ch" + std::to_string(j));
        if (labels_.size() != channels_.size())
            throw DimensionError("panel has " + std::to_string(channels_.size()) + " channels but " +
                                 std::to_string(labels_.size()) + " labels");
        if (!(dt_ > 0.0) || !std::isfinite(dt_))
            throw DimensionError("sampling period must be positive and finite");
        const auto len = channels_.front().size();
        for (const auto& ch : channels_) {
            if (ch.size() != len)
                throw DimensionError("panel channels differ in length");
            for (double v : ch)
                if (!std::isfinite(v))
                    throw DimensionError("panel contains a non-finite sample");
        }
        if (len == 1)
            throw DimensionError("panel length must be 0 or >= 2");
    }

    std::size_t channel_count() const noexcept { return channels_.size(); }
    std::size_t length() const noexcept { return channels_.front().size(); }
    bool empty() const noexcept { return length() == 0; }
    double dt() const noexcept { return dt_; }
    double nyquist() const noexcept { return 1.0 / (2.0 * dt_); }
    std::int64_t origin_ms() const noexcept { return origin_ms_; }
    std::int64_t dt_ms() const noexcept { return std::llround(dt_ * 60000.0); }
    std::int64_t time_ms(std::size_t k) const noexcept {
        return origin_ms_ + static_cast<std::int64_t>(k) * dt_ms();
    }

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(std::size_t j) const { return labels_.at(j); }
    std::span<const double> channel(std::size_t j) const { return channels_.at(j); }

    /// Samples [begin, end) of every channel; origin shifts accordingly.
    SignalPanel slice(std::size_t begin, std::size_t end) const {
        if (begin > end || end > length())
            throw OutOfRangeError("panel slice out of range");
        std::vector<std::vector<double>> out;
        out.reserve(channels_.size());
        for (const auto& ch : channels_)
            out.emplace_back(ch.begin() + static_cast<std::ptrdiff_t>(begin),
                             ch.begin() + static_cast<std::ptrdiff_t>(end));
        return SignalPanel(labels_, std::move(out), dt_, time_ms(begin));
    }

    /// Subset of channels, in the order given.
    SignalPanel select(std::span<const std::size_t> indices) const {
        std::vector<std::string> labels;
        std::vector<std::vector<double>> out;
        for (auto j : indices) {
            if (j >= channels_.size())
                throw OutOfRangeError("channel index " + std::to_string(j) + " out of range");
            labels.push_back(labels_[j]);
            out.push_back(channels_[j]);
        }
        return SignalPanel(std::move(labels), std::move(out), dt_, origin_ms_);
    }

private:
    std::vector<std::string> labels_;
    std::vector<std::vector<double>> channels_;
    double dt_;
    std::int64_t origin_ms_;
};

} // namespace specdist

#endif // SPECDIST_PANEL_HPP
