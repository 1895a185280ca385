#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lyaprate {

/// Frame counts. Signed so that negative inputs can be detected and rejected.
using Frames = std::int64_t;

/// Sampling rate in frames per second.
using Rate = double;

/// Discrete candidate rate set, strictly ascending, all entries positive.
class RateSet {
public:
    explicit RateSet(std::vector<Rate> rates) : rates_(std::move(rates)) {
        if (rates_.empty()) {
            throw std::invalid_argument("rate set must not be empty");
        }
        for (std::size_t i = 0; i < rates_.size(); ++i) {
            if (!std::isfinite(rates_[i]) || rates_[i] <= 0.0) {
                throw std::invalid_argument("rates must be finite and positive");
            }
            if (i > 0 && !(rates_[i - 1] < rates_[i])) {
                throw std::invalid_argument("rates must be strictly ascending");
            }
        }
    }

    RateSet(std::initializer_list<Rate> rates) : RateSet(std::vector<Rate>(rates)) {}

    /// {1, 2, ..., n}
    static RateSet integers(int n) {
        std::vector<Rate> r;
        for (int i = 1; i <= n; ++i) {
            r.push_back(static_cast<Rate>(i));
        }
        return RateSet(std::move(r));
    }

    [[nodiscard]] std::span<const Rate> values() const noexcept { return rates_; }
    [[nodiscard]] std::size_t size() const noexcept { return rates_.size(); }
    [[nodiscard]] Rate min() const noexcept { return rates_.front(); }
    [[nodiscard]] Rate max() const noexcept { return rates_.back(); }
    [[nodiscard]] Rate operator[](std::size_t i) const { return rates_.at(i); }

    [[nodiscard]] bool contains(Rate f) const noexcept {
        return std::binary_search(rates_.begin(), rates_.end(), f);
    }

    auto begin() const noexcept { return rates_.begin(); }
    auto end() const noexcept { return rates_.end(); }

    friend bool operator==(const RateSet&, const RateSet&) = default;

private:
    std::vector<Rate> rates_;
};

/// Utility/stability trade-off weight V. Non-negative and finite.
class TradeoffV {
public:
    explicit TradeoffV(double v) : v_(v) {
        if (!std::isfinite(v) || v < 0.0) {
            throw std::invalid_argument("V must be finite and non-negative");
        }
    }

    [[nodiscard]] double value() const noexcept { return v_; }

    friend bool operator==(const TradeoffV&, const TradeoffV&) = default;

private:
    double v_;
};

}  // namespace lyaprate
