#include "dre/data/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dre/error.hpp"

namespace dre::data {
namespace {

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

PairExample parse_jsonl_line(const std::string& line, std::size_t number) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(line_error(number, std::string("invalid JSON: ") + e.what()));
  }
  if (!j.is_object()) throw FormatError(line_error(number, "expected a JSON object"));
  auto field = [&](const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw FormatError(line_error(number, std::string("missing field '") + name + "'"));
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw FormatError(line_error(number, std::string("field '") + name + "' must be a string"));
  };
  return {field("id"), field("text_a"), field("text_b"), field("label")};
}

PairExample parse_tsv_line(std::string line, std::size_t number) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  if (cols.size() != 4) {
    throw FormatError(line_error(number, "expected 4 tab-separated columns (id, text_a, text_b, label), found " +
                                             std::to_string(cols.size())));
  }
  return {cols[0], cols[1], cols[2], cols[3]};
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "jsonl") return DatasetFormat::jsonl;
  if (name == "tsv") return DatasetFormat::tsv;
  throw ConfigError("unknown dataset format '" + std::string(name) + "' (expected jsonl or tsv)");
}

DatasetFormat format_from_extension(const std::filesystem::path& path) {
  return path.extension() == ".tsv" ? DatasetFormat::tsv : DatasetFormat::jsonl;
}

Dataset read_dataset(std::istream& in, DatasetFormat format) {
  Dataset ds;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (blank(line)) continue;
    if (format == DatasetFormat::tsv && ds.examples.empty() &&
        line.rfind("id\ttext_a\ttext_b\tlabel", 0) == 0) {
      continue;
    }
    PairExample ex = format == DatasetFormat::jsonl ? parse_jsonl_line(line, number)
                                                    : parse_tsv_line(line, number);
    if (ex.id.empty()) throw FormatError(line_error(number, "empty id"));
    if (blank(ex.text_a)) throw FormatError(line_error(number, "empty text_a"));
    if (blank(ex.text_b)) throw FormatError(line_error(number, "empty text_b"));
    if (ex.label.empty()) throw FormatError(line_error(number, "empty label"));
    if (std::find(ds.labels.begin(), ds.labels.end(), ex.label) == ds.labels.end()) {
      ds.labels.push_back(ex.label);
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset '" + path.string() + "'");
  return read_dataset(in, format);
}

void write_jsonl(std::ostream& out, std::span<const PairExample> examples) {
  for (const auto& ex : examples) {
    nlohmann::json j = {{"id", ex.id}, {"text_a", ex.text_a}, {"text_b", ex.text_b}, {"label", ex.label}};
    out << j.dump() << '\n';
  }
}

std::vector<std::string> load_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!blank(line)) lines.push_back(line);
  }
  return lines;
}

}  // namespace dre::data
