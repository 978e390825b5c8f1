#pragma once

// Parsing of numeric command-line arguments: angle literals such as "pi/3",
// "2pi/3", "-0.5*pi", "1/2", and complex coin entries such as "0.5-0.5i".

#include <cctype>
#include <cstdlib>
#include <string>
#include <vector>

#include "cqw/core.hpp"
#include "cqw/moments.hpp"

namespace cqw::cli {

namespace detail {

inline double parse_number(const std::string& s, const std::string& whole) {
    if (s.empty()) throw ConfigError("cannot parse number '" + whole + "'");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) throw ConfigError("cannot parse number '" + whole + "'");
    return v;
}

inline std::string strip(std::string s) {
    std::string out;
    for (char c : s)
        if (!std::isspace(static_cast<unsigned char>(c))) out += c;
    return out;
}

}  // namespace detail

/// [sign] (number | [number][*]pi) [/ number]
inline double parse_scalar(const std::string& text) {
    std::string s = detail::strip(text);
    double sign = 1.0;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        sign = s[0] == '-' ? -1.0 : 1.0;
        s.erase(0, 1);
        if (!s.empty() && (s[0] == '-' || s[0] == '+')) throw ConfigError("cannot parse number '" + text + "'");
    }
    double denom = 1.0;
    if (const auto slash = s.find('/'); slash != std::string::npos) {
        denom = detail::parse_number(s.substr(slash + 1), text);
        s.resize(slash);
        if (denom == 0.0) throw ConfigError("division by zero in '" + text + "'");
    }
    double value;
    if (const auto p = s.find("pi"); p != std::string::npos && p + 2 == s.size()) {
        std::string factor = s.substr(0, p);
        if (!factor.empty() && factor.back() == '*') factor.pop_back();
        value = (factor.empty() ? 1.0 : detail::parse_number(factor, text)) * pi;
    } else {
        value = detail::parse_number(s, text);
    }
    return sign * value / denom;
}

/// Real scalar, "bi", or "a+bi" / "a-bi" with scalars as in parse_scalar.
inline Complex parse_complex(const std::string& text) {
    const std::string s = detail::strip(text);
    if (s.empty() || s.back() != 'i' || (s.size() >= 2 && s.substr(s.size() - 2) == "pi"))
        return {parse_scalar(s), 0.0};
    const std::string body = s.substr(0, s.size() - 1);
    std::size_t split = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    auto imag = [&](std::string t) {
        if (t.empty() || t == "+") return 1.0;
        if (t == "-") return -1.0;
        if (t.back() == '*') t.pop_back();
        return parse_scalar(t);
    };
    if (split == std::string::npos) return {0.0, imag(body)};
    return {parse_scalar(body.substr(0, split)), imag(body.substr(split))};
}

inline std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out(1);
    for (char c : s) {
        if (c == ',') out.emplace_back();
        else out.back() += c;
    }
    return out;
}

/// "a,b,c,d" amplitudes of a|00> + b|01> + c|10> + d|11>.
inline CellState parse_cell(const std::string& text) {
    const auto parts = split_commas(text);
    if (parts.size() != 4) throw ConfigError("coin state needs 4 comma-separated amplitudes, got '" + text + "'");
    CellState c{parse_complex(parts[0]), parse_complex(parts[1]), parse_complex(parts[2]), parse_complex(parts[3])};
    c.require_unit();
    return c;
}

/// Exit code for a library failure: numerical non-convergence is 3, anything
/// else is a configuration problem (1).
inline int exit_code_for(const Error& e) {
    const std::string k = e.kind();
    return k == "convergence" || k == "band-edge" ? 3 : 1;
}

}  // namespace cqw::cli
