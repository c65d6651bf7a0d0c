#pragma once

// Small delimited-text helpers shared by the readers and writers.

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace corrstruct::detail {

inline std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

inline char detect_delimiter(std::string_view header) {
    if (header.find('\t') != std::string_view::npos) return '\t';
    if (header.find(',') == std::string_view::npos && header.find(';') != std::string_view::npos) {
        return ';';
    }
    return ',';
}

/// Splits on delim, trimming whitespace and surrounding double quotes.
inline std::vector<std::string> split(std::string_view line, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        auto field = trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
        if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
            field = field.substr(1, field.size() - 2);
        }
        out.emplace_back(field);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

/// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace corrstruct::detail
