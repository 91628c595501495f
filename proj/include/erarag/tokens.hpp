#pragma once

#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace erarag {

inline std::vector<std::string_view> split_tokens(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
}

// Whitespace token count; the offline unit of every token budget.
inline std::uint32_t token_count(std::string_view text) {
    return static_cast<std::uint32_t>(split_tokens(text).size());
}

inline std::string join_tokens(const std::vector<std::string_view>& toks,
                               std::size_t first, std::size_t count) {
    std::string out;
    for (std::size_t i = first; i < first + count && i < toks.size(); ++i) {
        if (!out.empty()) out += ' ';
        out.append(toks[i]);
    }
    return out;
}

}  // namespace erarag
