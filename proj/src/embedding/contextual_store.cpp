#include "dre/embedding/contextual_store.hpp"

#include <fstream>

#include "dre/binary_io.hpp"

namespace dre::emb {
namespace {

constexpr char kMagic[4] = {'D', 'R', 'E', 'E'};

}  // namespace

ContextualStore ContextualStore::read(std::istream& in,
                                      std::optional<std::size_t> expected_dimension) {
  io::Reader r(in);
  const std::string magic = r.string(4, "magic");
  if (magic != std::string(kMagic, 4)) {
    throw FormatError("not a contextual store: bad magic at byte offset 0");
  }
  const auto k = r.read<std::uint32_t>("dimension");
  if (k == 0) throw FormatError("contextual store declares dimension 0 at byte offset 4");
  if (expected_dimension && *expected_dimension != k) {
    throw ConfigError("contextual store has dimension " + std::to_string(k) +
                      " but the model expects " + std::to_string(*expected_dimension));
  }
  const auto count = r.read<std::uint32_t>("example count");

  ContextualStore store(k);
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto id_len = r.read<std::uint32_t>("id length");
    std::string id = r.string(id_len, "example id");
    const std::uint64_t rows_offset = r.offset();
    const auto rows = r.read<std::uint32_t>("row count");
    if (rows == 0) {
      throw FormatError("example '" + id + "' has zero rows at byte offset " +
                        std::to_string(rows_offset));
    }
    std::vector<float> values(static_cast<std::size_t>(rows) * k);
    r.bytes(reinterpret_cast<char*>(values.data()), values.size() * sizeof(float), "matrix values");
    store.insert(std::move(id), ad::Tensor<float>(ad::Shape{rows, k}, std::move(values)));
  }
  return store;
}

ContextualStore ContextualStore::load(const std::filesystem::path& path,
                                      std::optional<std::size_t> expected_dimension) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open contextual store '" + path.string() + "'");
  return read(in, expected_dimension);
}

void ContextualStore::write(std::ostream& out) const {
  out.write(kMagic, 4);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dimension_));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ids_.size()));
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(ids_[i].size()));
    out.write(ids_[i].data(), static_cast<std::streamsize>(ids_[i].size()));
    const auto& m = matrices_[i];
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.size() * sizeof(float)));
  }
}

void ContextualStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write contextual store '" + path.string() + "'");
  write(out);
}

void ContextualStore::insert(std::string id, ad::Tensor<float> matrix) {
  if (dimension_ == 0) throw ConfigError("contextual store dimension is unset");
  if (matrix.cols() != dimension_ || matrix.rank() != 2) {
    throw ShapeError("contextual matrix for '" + id + "' has shape " + ad::to_string(matrix.shape()) +
                     ", store dimension is " + std::to_string(dimension_));
  }
  if (auto it = index_.find(id); it != index_.end()) {
    matrices_[it->second] = std::move(matrix);
    return;
  }
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  matrices_.push_back(std::move(matrix));
}

const ad::Tensor<float>& ContextualStore::at(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) {
    throw ConfigError("contextual store has no entry for example '" + id + "'");
  }
  return matrices_[it->second];
}

}  // namespace dre::emb
