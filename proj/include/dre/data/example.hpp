#pragma once

#include <string>

namespace dre::data {

// One labelled text pair; the unit of every dataset.
struct PairExample {
  std::string id;
  std::string text_a;
  std::string text_b;
  std::string label;

  bool operator==(const PairExample&) const = default;
};

}  // namespace dre::data
