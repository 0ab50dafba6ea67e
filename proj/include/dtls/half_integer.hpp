#pragma once

#include <compare>
#include <string>

namespace dtls {

// An angular-momentum quantum number stored as twice its value, so that
// both integer and half-integer values are represented exactly.
class HalfInt {
public:
    constexpr HalfInt() = default;

    static constexpr HalfInt from_twice(int twice) {
        HalfInt h;
        h.twice_ = twice;
        return h;
    }

    // Throws std::invalid_argument unless `value` is a multiple of 1/2.
    static HalfInt from_double(double value);

    constexpr int twice() const { return twice_; }
    constexpr double value() const { return 0.5 * twice_; }
    constexpr bool is_integer() const { return twice_ % 2 == 0; }

    constexpr HalfInt operator-() const { return from_twice(-twice_); }
    constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
    constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }

    constexpr auto operator<=>(const HalfInt&) const = default;

    std::string to_string() const;

private:
    int twice_ = 0;
};

// Number of magnetic sublevels 2F+1.
constexpr int multiplicity(HalfInt f) { return f.twice() + 1; }

} // namespace dtls
