#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace txflow {

/// BTC amount stored as an integer number of satoshi (1e-8 BTC).
class Amount {
public:
    static constexpr std::int64_t kSatoshiPerCoin = 100'000'000;

    constexpr Amount() = default;
    static constexpr Amount from_satoshi(std::int64_t sat) { return Amount(sat); }

    /// Parses a non-negative decimal with at most 8 fractional digits
    /// ("0.7", "12", "3.00000001"). Throws DataError otherwise.
    static Amount parse(std::string_view text);

    constexpr std::int64_t satoshi() const { return sat_; }
    double to_btc() const { return static_cast<double>(sat_) / kSatoshiPerCoin; }

    /// Shortest exact decimal representation, e.g. "0.7", "3", "0.00000001".
    std::string to_string() const;

    constexpr Amount& operator+=(Amount other) {
        sat_ += other.sat_;
        return *this;
    }
    friend constexpr Amount operator+(Amount a, Amount b) { return a += b; }
    friend constexpr auto operator<=>(Amount, Amount) = default;

private:
    constexpr explicit Amount(std::int64_t sat) : sat_(sat) {}
    std::int64_t sat_ = 0;
};

}  // namespace txflow
