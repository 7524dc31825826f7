// Writes the synthetic paraphrase set and question list used in the README.
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dre/data/dataset.hpp"
#include "dre/data/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write toy datasets"};
  std::string out = "toy";
  std::size_t pairs = 64;
  std::size_t questions = 50;
  std::uint64_t seed = 11;
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_option("--pairs", pairs, "Pairs in train.jsonl")->capture_default_str();
  app.add_option("--questions", questions, "Lines in questions.txt")->capture_default_str();
  app.add_option("--seed", seed, "Generator seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  std::filesystem::create_directories(out);
  const auto ds = dre::data::synthetic_matching_set(pairs, seed);
  std::ofstream train(std::filesystem::path(out) / "train.jsonl");
  dre::data::write_jsonl(train, ds.examples);
  std::ofstream q(std::filesystem::path(out) / "questions.txt");
  for (const auto& line : dre::data::synthetic_questions(questions, seed)) q << line << '\n';
  std::cout << "wrote " << ds.examples.size() << " pairs and " << questions << " questions to "
            << out << '\n';
  return 0;
}
