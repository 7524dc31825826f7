#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "dre/autodiff/tensor.hpp"

namespace dre::emb {

// Frozen per-token vectors keyed by example id, in the "DREE" file format:
//
//   "DREE" | u32 k | u32 count | count x ( u32 id_len | id bytes (UTF-8)
//                                         | u32 T | T*k f32 row-major )
//
// All integers and floats are little-endian.
class ContextualStore {
 public:
  ContextualStore() = default;
  explicit ContextualStore(std::size_t dimension) : dimension_(dimension) {}

  // Throws FormatError (with the byte offset) on truncated or malformed
  // input, and ConfigError when expected_dimension is given and differs.
  static ContextualStore read(std::istream& in,
                              std::optional<std::size_t> expected_dimension = std::nullopt);
  static ContextualStore load(const std::filesystem::path& path,
                              std::optional<std::size_t> expected_dimension = std::nullopt);

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  // Matrix must be T x dimension(). Replaces an existing entry.
  void insert(std::string id, ad::Tensor<float> matrix);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return ids_.size(); }
  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  // Throws ConfigError naming the id when absent.
  const ad::Tensor<float>& at(const std::string& id) const;
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::size_t dimension_ = 0;
  std::vector<std::string> ids_;
  std::vector<ad::Tensor<float>> matrices_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace dre::emb
