#include "txflow/amount.hpp"

#include <limits>

#include "txflow/error.hpp"

namespace txflow {

Amount Amount::parse(std::string_view text) {
    auto fail = [&](const char* why) {
        return DataError("invalid amount '" + std::string(text) + "': " + why);
    };
    if (text.empty()) throw fail("empty");
    if (text.front() == '-') throw fail("negative");
    if (text.front() == '+') text.remove_prefix(1);

    std::int64_t whole = 0;
    std::int64_t frac = 0;
    int frac_digits = 0;
    bool seen_dot = false;
    bool any_digit = false;
    constexpr auto kMaxWhole = std::numeric_limits<std::int64_t>::max() / kSatoshiPerCoin - 1;

    for (char c : text) {
        if (c == '.') {
            if (seen_dot) throw fail("multiple decimal points");
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9') throw fail("not a decimal number");
        any_digit = true;
        const int digit = c - '0';
        if (!seen_dot) {
            whole = whole * 10 + digit;
            if (whole > kMaxWhole) throw fail("out of range");
        } else {
            if (++frac_digits > 8) throw fail("more than 8 fractional digits");
            frac = frac * 10 + digit;
        }
    }
    if (!any_digit) throw fail("no digits");
    for (int i = frac_digits; i < 8; ++i) frac *= 10;
    return Amount(whole * kSatoshiPerCoin + frac);
}

std::string Amount::to_string() const {
    std::string out = std::to_string(sat_ / kSatoshiPerCoin);
    std::int64_t frac = sat_ % kSatoshiPerCoin;
    if (frac == 0) return out;
    std::string digits = std::to_string(frac);
    digits.insert(0, 8 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    return out + "." + digits;
}

}  // namespace txflow
