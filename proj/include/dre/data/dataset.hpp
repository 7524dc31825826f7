#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dre/data/example.hpp"

namespace dre::data {

enum class DatasetFormat { jsonl, tsv };

// "jsonl" or "tsv"; anything else is a ConfigError.
DatasetFormat parse_dataset_format(std::string_view name);
// Guesses from the file extension, defaulting to jsonl.
DatasetFormat format_from_extension(const std::filesystem::path& path);

struct Dataset {
  std::vector<PairExample> examples;
  // Distinct labels in order of first appearance.
  std::vector<std::string> labels;
};

// jsonl: one object per line with string fields id, text_a, text_b, label.
// tsv: columns id, text_a, text_b, label; an identical header row is skipped.
// Blank lines are ignored. Missing fields and empty texts raise FormatError
// naming the 1-based line number.
Dataset read_dataset(std::istream& in, DatasetFormat format);
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format);

void write_jsonl(std::ostream& out, std::span<const PairExample> examples);

// Reads one question per non-blank line.
std::vector<std::string> load_lines(const std::filesystem::path& path);

}  // namespace dre::data
