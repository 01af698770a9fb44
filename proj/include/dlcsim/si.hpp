#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>
#include <string_view>

namespace dlcsim::si {

/// Parse a SPICE-style value: a decimal number with an optional engineering
/// suffix (f, p, n, u, m, k, meg; case-insensitive). Trailing unit letters
/// after the suffix are ignored, so "720nm" and "1kOhm" are accepted.
/// The suffix is folded into the decimal exponent before conversion, so
/// "720n" yields the same double as the literal 720e-9.
inline std::optional<double> parse(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::string buf(text);
    const char* begin = buf.c_str();
    char* end = nullptr;
    const double mantissa = std::strtod(begin, &end);
    if (end == begin) return std::nullopt;
    const std::string prefix(begin, static_cast<std::size_t>(end - begin));

    std::string rest(end);
    for (char& c : rest) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    int exp10 = 0;
    if (!rest.empty()) {
        if (rest.rfind("meg", 0) == 0) {
            exp10 = 6;
        } else {
            switch (rest[0]) {
                case 'f': exp10 = -15; break;
                case 'p': exp10 = -12; break;
                case 'n': exp10 = -9; break;
                case 'u': exp10 = -6; break;
                case 'm': exp10 = -3; break;
                case 'k': exp10 = 3; break;
                default:
                    if (std::isalpha(static_cast<unsigned char>(rest[0])) == 0)
                        return std::nullopt;
                    break;
            }
        }
    }
    if (exp10 == 0) return mantissa;
    if (prefix.find('e') == std::string::npos && prefix.find('E') == std::string::npos) {
        const std::string sci = prefix + "e" + std::to_string(exp10);
        return std::strtod(sci.c_str(), nullptr);
    }
    return mantissa * std::pow(10.0, exp10);
}

/// Shortest decimal representation that parses back to exactly `value`.
inline std::string format_exact(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

/// Canonical engineering-suffix formatting. A suffix is used only when the
/// scaled mantissa reparses to the exact original double; otherwise the
/// plain shortest form is emitted.
inline std::string format(double value) {
    if (value == 0.0 || !std::isfinite(value)) return format_exact(value);

    struct Suffix { double scale; const char* tag; };
    static constexpr Suffix suffixes[] = {
        {1e-15, "f"}, {1e-12, "p"}, {1e-9, "n"}, {1e-6, "u"},
        {1e3, "k"}, {1e6, "meg"},
    };

    const double mag = std::fabs(value);
    for (const auto& s : suffixes) {
        if (mag >= s.scale && mag < s.scale * 1e3) {
            // The suffixed text must reparse to the identical double; the
            // mantissa division can land one ulp off, so try increasing
            // precision and verify through parse itself.
            const double mantissa = value / s.scale;
            char buf[40];
            for (int prec = 15; prec <= 17; ++prec) {
                std::snprintf(buf, sizeof(buf), "%.*g", prec, mantissa);
                const std::string candidate = std::string(buf) + s.tag;
                if (parse(candidate) == value) return candidate;
            }
            break;
        }
    }
    return format_exact(value);
}

}  // namespace dlcsim::si
