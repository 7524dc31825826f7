#include "dre/data/tfidf.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <json.hpp>

#include "dre/data/dataset.hpp"
#include "dre/data/tokenize.hpp"
#include "dre/error.hpp"

namespace dre::data {

std::vector<std::string> tfidf_terms(const std::string& text) {
  std::vector<std::string> terms = tokenize(text);
  std::erase_if(terms, [](const std::string& t) { return is_punctuation_token(t); });
  return terms;
}

TfidfModel TfidfModel::fit(std::span<const std::string> corpus) {
  if (corpus.empty()) throw ConfigError("tf-idf needs a non-empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    auto terms = tfidf_terms(doc);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (auto& t : terms) ++df[t];
  }
  TfidfModel model;
  model.documents_ = corpus.size();
  const double n = static_cast<double>(corpus.size());
  for (const auto& [term, count] : df) {
    model.ids_.emplace(term, model.terms_.size());
    model.terms_.push_back(term);
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return model;
}

double TfidfModel::idf(const std::string& term) const {
  auto it = ids_.find(term);
  if (it == ids_.end()) throw ConfigError("term '" + term + "' is not in the tf-idf vocabulary");
  return idf_[it->second];
}

TfidfVector TfidfModel::transform(const std::string& text) const {
  std::map<std::size_t, double> counts;
  for (const auto& t : tfidf_terms(text)) {
    auto it = ids_.find(t);
    if (it != ids_.end()) counts[it->second] += 1.0;
  }
  TfidfVector v;
  double norm2 = 0.0;
  for (const auto& [id, tf] : counts) {
    const double w = tf * idf_[id];
    v.entries.emplace_back(id, w);
    norm2 += w * w;
  }
  if (v.entries.empty()) return v;
  const double norm = std::sqrt(norm2);
  for (auto& e : v.entries) e.second /= norm;
  v.zero = false;
  return v;
}

double cosine(const TfidfVector& u, const TfidfVector& v) {
  if (u.zero || v.zero) return 0.0;
  double dot = 0.0;
  auto a = u.entries.begin();
  auto b = v.entries.begin();
  while (a != u.entries.end() && b != v.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      dot += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return std::clamp(dot, 0.0, 1.0);
}

std::vector<double> similarity_matrix(std::span<const TfidfVector> docs, kernels::Exec exec) {
  const std::size_t n = docs.size();
  std::vector<double> sims(n * n);
  auto row = [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) sims[i * n + j] = cosine(docs[i], docs[j]);
  };
  const int threads = kernels::max_threads();
  if (exec == kernels::Exec::parallel && threads > 1 && n > 1 && !omp_in_parallel()) {
    const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < rows; ++i) row(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < n; ++i) row(i);
  }
  return sims;
}

MiningResult mine_negatives(std::span<const std::string> questions, MiningBand band,
                            kernels::Exec exec) {
  if (!(band.low <= band.high)) {
    throw ConfigError("mining band is inverted: low " + std::to_string(band.low) + " > high " +
                      std::to_string(band.high));
  }
  if (questions.size() < 2) throw ConfigError("mining needs at least two questions");

  const TfidfModel model = TfidfModel::fit(questions);
  std::vector<TfidfVector> docs;
  docs.reserve(questions.size());
  for (const auto& q : questions) docs.push_back(model.transform(q));
  const std::vector<double> sims = similarity_matrix(docs, exec);

  const std::size_t n = questions.size();
  MiningResult result;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pick = n;
    double pick_sim = -1.0;
    double best = -1.0;
    bool above = false;
    bool below = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = sims[i * n + j];
      best = std::max(best, s);
      if (s < band.low) {
        below = true;
      } else if (s > band.high) {
        above = true;
      } else if (s > pick_sim) {
        pick = j;
        pick_sim = s;
      }
    }
    if (pick < n) {
      result.negatives.push_back({i, pick, pick_sim});
    } else {
      const char* reason = above && below ? "band_gap" : above ? "above_band" : "below_band";
      result.unmatched.push_back({i, best, reason});
    }
  }
  return result;
}

std::vector<Question> load_questions(const std::string& path) {
  std::vector<Question> out;
  const bool jsonl = path.size() >= 6 && path.compare(path.size() - 6, 6, ".jsonl") == 0;
  std::size_t number = 0;
  for (const auto& line : load_lines(path)) {
    ++number;
    if (!jsonl) {
      out.push_back({"q" + std::to_string(out.size()), line});
      continue;
    }
    try {
      const auto j = nlohmann::json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("question " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace dre::data
