#include "delib/core/fraction.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

namespace delib::core {

Fraction fraction_from_decimal(std::string_view text) {
    if (text.empty()) {
        throw std::invalid_argument("empty decimal literal");
    }
    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '+' || text[pos] == '-') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::string int_digits;
    std::string frac_digits;
    bool seen_dot = false;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (c == '.') {
            if (seen_dot) {
                throw std::invalid_argument("malformed decimal literal");
            }
            seen_dot = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            (seen_dot ? frac_digits : int_digits) += c;
        } else {
            throw std::invalid_argument("malformed decimal literal");
        }
    }
    if (int_digits.empty() && frac_digits.empty()) {
        throw std::invalid_argument("malformed decimal literal");
    }
    if (int_digits.size() + frac_digits.size() > 18) {
        throw std::invalid_argument("decimal literal exceeds supported precision");
    }
    std::int64_t num = 0;
    for (char c : int_digits) num = num * 10 + (c - '0');
    std::int64_t den = 1;
    for (char c : frac_digits) {
        num = num * 10 + (c - '0');
        den *= 10;
    }
    if (negative) num = -num;
    return Fraction(num, den);
}

std::string fraction_to_decimal(const Fraction& f, int digits) {
    std::int64_t scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    Fraction scaled = f * scale;
    // round half away from zero
    std::int64_t whole = scaled.numerator() / scaled.denominator();
    std::int64_t rem = scaled.numerator() % scaled.denominator();
    if (rem != 0) {
        std::int64_t twice = (rem < 0 ? -rem : rem) * 2;
        if (twice >= scaled.denominator()) whole += (scaled.numerator() < 0 ? -1 : 1);
    }
    bool negative = whole < 0;
    std::uint64_t mag = negative ? static_cast<std::uint64_t>(-whole) : static_cast<std::uint64_t>(whole);
    std::uint64_t uscale = static_cast<std::uint64_t>(scale);
    std::string frac_part = std::to_string(mag % uscale);
    frac_part.insert(frac_part.begin(), static_cast<std::size_t>(digits) - frac_part.size(), '0');
    std::string out = negative ? "-" : "";
    out += std::to_string(mag / uscale);
    if (digits > 0) {
        out += '.';
        out += frac_part;
    }
    return out;
}

double fraction_to_double(const Fraction& f) {
    return static_cast<double>(f.numerator()) / static_cast<double>(f.denominator());
}

}  // namespace delib::core
