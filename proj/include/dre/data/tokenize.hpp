#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dre::data {

// Lowercases (Unicode-aware), splits on whitespace, and emits every
// punctuation code point as a token of its own. Zero-width joiners and
// non-joiners stay inside words, which keeps Persian compounds intact.
std::vector<std::string> tokenize(std::string_view text);

// True for a token that is a single punctuation code point.
bool is_punctuation_token(std::string_view token);

// UTF-8 helpers shared with the tokenizer tests.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

}  // namespace dre::data
