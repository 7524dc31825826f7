#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "dre/data/dataset.hpp"

namespace dre::data {

// Toy paraphrase set. Each topic owns three made-up content words; a pair
// holds a question about one topic and a rewording about the same topic
// ("match") or another topic ("not_match"). Classes are balanced and the
// output depends only on the arguments.
Dataset synthetic_matching_set(std::size_t pairs, std::uint64_t seed);

// Short questions over a small shared vocabulary, so pairwise tf-idf
// similarities spread across the low range.
std::vector<std::string> synthetic_questions(std::size_t count, std::uint64_t seed);

}  // namespace dre::data
