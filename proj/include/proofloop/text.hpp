#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace proofloop::text {

// Whitespace-delimited tokenizer. This is the single tokenizer used for every
// token budget in the project (prompt limits, the 8,000-token feedback rule,
// token edit distances). It deliberately diverges from model tokenizers;
// budgets here are bookkeeping, not model-exact counts.
std::vector<std::string_view> tokenize(std::string_view s);

std::size_t count_tokens(std::string_view s);

// Keep at most the last `max_tokens` whitespace tokens' worth of complete
// lines, dropping lines from the head. A single over-long line is kept whole.
std::string keep_tail_lines_within(std::string_view s, std::size_t max_tokens);

// Levenshtein distance over whitespace tokens, capped at `bound`.
// Returns min(distance, bound + 1); exact whenever the result is <= bound.
std::size_t token_edit_distance_bounded(std::string_view a, std::string_view b, std::size_t bound);

// Exact token-level Levenshtein distance (small inputs only; tests and
// boundary checks).
std::size_t token_edit_distance(std::string_view a, std::string_view b);

// Lean-style comment stripping: `--` to end of line and nestable `/- ... -/`
// blocks. String literals are not modeled; statement signatures at dedup
// granularity do not need them.
std::string strip_lean_comments(std::string_view s);

// Collapse every run of whitespace to a single space and trim the ends.
std::string collapse_whitespace(std::string_view s);

// strip_lean_comments + collapse_whitespace: the normalized signature under
// which two statements count as duplicates.
std::string normalize_statement(std::string_view s);

// Whitespace-insensitive proof equality (collapse + trim both sides).
bool equal_modulo_whitespace(std::string_view a, std::string_view b);

// FNV-1a 64-bit over raw bytes. Stable across runs and platforms; the basis
// of content-addressed ids and run seeds.
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t fnv1a64_mix(std::uint64_t seed, std::string_view s);
std::uint64_t fnv1a64_mix(std::uint64_t seed, std::uint64_t v);

std::string hex64(std::uint64_t v);

// One fenced code block (``` ... ```) of a markdown-ish completion.
struct FencedBlock {
    std::string label;    // text after the opening fence, trimmed
    std::string content;  // body without the fence lines, trailing newline kept as-is
};

// All fenced blocks in order. An unterminated opening fence captures the rest
// of the text as its body.
std::vector<FencedBlock> fenced_blocks(std::string_view s);

std::string trim(std::string_view s);

}  // namespace proofloop::text
