#include "proofloop/text.hpp"

#include <algorithm>
#include <cctype>

namespace proofloop::text {

namespace {

bool is_ws(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace

std::vector<std::string_view> tokenize(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_ws(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_ws(s[i])) ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

std::size_t count_tokens(std::string_view s) {
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_ws(s[i])) ++i;
        if (i < s.size()) ++n;
        while (i < s.size() && !is_ws(s[i])) ++i;
    }
    return n;
}

std::string keep_tail_lines_within(std::string_view s, std::size_t max_tokens) {
    if (count_tokens(s) <= max_tokens) return std::string(s);
    // Split into lines, then take lines from the tail while the budget holds.
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            lines.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    std::size_t used = 0;
    std::size_t first_kept = lines.size();
    for (std::size_t j = lines.size(); j-- > 0;) {
        std::size_t t = count_tokens(lines[j]);
        if (used + t > max_tokens && first_kept != lines.size()) break;
        used += t;
        first_kept = j;
        if (used >= max_tokens) break;
    }
    std::string out;
    for (std::size_t j = first_kept; j < lines.size(); ++j) {
        out.append(lines[j]);
        if (j + 1 < lines.size()) out.push_back('\n');
    }
    return out;
}

std::size_t token_edit_distance_bounded(std::string_view a, std::string_view b, std::size_t bound) {
    auto ta = tokenize(a);
    auto tb = tokenize(b);
    std::size_t n = ta.size(), m = tb.size();
    std::size_t diff = n > m ? n - m : m - n;
    if (diff > bound) return bound + 1;
    // Banded Levenshtein: only cells with |i - j| <= bound matter.
    const std::size_t INF = bound + 1;
    std::vector<std::size_t> prev(m + 1, INF), cur(m + 1, INF);
    for (std::size_t j = 0; j <= std::min(m, bound); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        std::fill(cur.begin(), cur.end(), INF);
        std::size_t lo = i > bound ? i - bound : 0;
        std::size_t hi = std::min(m, i + bound);
        if (lo == 0) cur[0] = i <= bound ? i : INF;
        for (std::size_t j = std::max<std::size_t>(lo, 1); j <= hi; ++j) {
            std::size_t sub = prev[j - 1] == INF ? INF : prev[j - 1] + (ta[i - 1] == tb[j - 1] ? 0 : 1);
            std::size_t del = prev[j] == INF ? INF : prev[j] + 1;
            std::size_t ins = cur[j - 1] == INF ? INF : cur[j - 1] + 1;
            cur[j] = std::min({sub, del, ins, INF});
        }
        std::swap(prev, cur);
    }
    return std::min(prev[m], INF);
}

std::size_t token_edit_distance(std::string_view a, std::string_view b) {
    auto ta = tokenize(a);
    auto tb = tokenize(b);
    std::size_t n = ta.size(), m = tb.size();
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            std::size_t sub = prev[j - 1] + (ta[i - 1] == tb[j - 1] ? 0 : 1);
            cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::string strip_lean_comments(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    int block_depth = 0;
    while (i < s.size()) {
        if (block_depth == 0 && i + 1 < s.size() && s[i] == '-' && s[i + 1] == '-') {
            while (i < s.size() && s[i] != '\n') ++i;
            continue;
        }
        if (i + 1 < s.size() && s[i] == '/' && s[i + 1] == '-') {
            ++block_depth;
            i += 2;
            continue;
        }
        if (block_depth > 0 && i + 1 < s.size() && s[i] == '-' && s[i + 1] == '/') {
            --block_depth;
            i += 2;
            continue;
        }
        if (block_depth == 0) out.push_back(s[i]);
        ++i;
    }
    return out;
}

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_ws = true;  // leading whitespace is dropped
    for (char c : s) {
        if (is_ws(c)) {
            in_ws = true;
        } else {
            if (in_ws && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_ws = false;
        }
    }
    return out;
}

std::string normalize_statement(std::string_view s) {
    return collapse_whitespace(strip_lean_comments(s));
}

bool equal_modulo_whitespace(std::string_view a, std::string_view b) {
    return collapse_whitespace(a) == collapse_whitespace(b);
}

std::uint64_t fnv1a64(std::string_view s) {
    return fnv1a64_mix(0xcbf29ce484222325ULL, s);
}

std::uint64_t fnv1a64_mix(std::uint64_t seed, std::string_view s) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64_mix(std::uint64_t seed, std::uint64_t v) {
    std::uint64_t h = seed;
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (i * 8)) & 0xff;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::vector<FencedBlock> fenced_blocks(std::string_view s) {
    std::vector<FencedBlock> out;
    std::size_t i = 0;
    bool in_block = false;
    FencedBlock cur;
    while (i <= s.size()) {
        std::size_t eol = s.find('\n', i);
        std::string_view line = s.substr(i, (eol == std::string_view::npos ? s.size() : eol) - i);
        std::string_view stripped = line;
        while (!stripped.empty() && (stripped.front() == ' ' || stripped.front() == '\t'))
            stripped.remove_prefix(1);
        bool fence = stripped.substr(0, 3) == "```";
        if (!in_block && fence) {
            in_block = true;
            cur.label = trim(stripped.substr(3));
            cur.content.clear();
        } else if (in_block && fence) {
            in_block = false;
            out.push_back(cur);
        } else if (in_block) {
            cur.content.append(line);
            cur.content.push_back('\n');
        }
        if (eol == std::string_view::npos) break;
        i = eol + 1;
    }
    if (in_block) out.push_back(cur);  // unterminated fence: body runs to EOF
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_ws(s[b])) ++b;
    while (e > b && is_ws(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace proofloop::text
