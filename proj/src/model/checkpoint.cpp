#include "dre/model/checkpoint.hpp"

#include <fstream>
#include <type_traits>

#include "dre/binary_io.hpp"

namespace dre::model {
namespace {

constexpr char kMagic[4] = {'D', 'R', 'E', '1'};

template <typename Real>
constexpr DType dtype_of() {
  return std::is_same_v<Real, float> ? DType::f32 : DType::f64;
}

}  // namespace

template <typename Real>
void write_checkpoint(std::ostream& out, const nlohmann::json& config,
                      const ad::ParameterSet<Real>& params) {
  out.write(kMagic, 4);
  const std::string text = config.dump();
  io::write_le<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& name = params.name(i);
    const auto& t = params[i];
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    io::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(dtype_of<Real>()));
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.size() * sizeof(Real)));
  }
  if (!out) throw Error("failed writing checkpoint");
}

template <typename Real>
CheckpointContents<Real> read_checkpoint(std::istream& in) {
  io::Reader r(in);
  if (r.string(4, "magic") != std::string(kMagic, 4)) {
    throw FormatError("not a checkpoint: bad magic at byte offset 0");
  }
  const auto config_len = r.read<std::uint64_t>("config length");
  const std::uint64_t config_offset = r.offset();
  const std::string text = r.string(config_len, "config block");
  CheckpointContents<Real> contents;
  try {
    contents.config = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("checkpoint config at byte offset " + std::to_string(config_offset) +
                      " is not valid JSON: " + e.what());
  }
  const auto count = r.read<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.read<std::uint32_t>("name length");
    std::string name = r.string(name_len, "tensor name");
    const std::uint64_t dtype_offset = r.offset();
    const auto dtype = r.read<std::uint8_t>("dtype tag");
    if (dtype != static_cast<std::uint8_t>(dtype_of<Real>())) {
      throw FormatError("tensor '" + name + "' has dtype tag " + std::to_string(dtype) +
                        " at byte offset " + std::to_string(dtype_offset) +
                        ", expected " + std::to_string(static_cast<int>(dtype_of<Real>())));
    }
    const auto rank = r.read<std::uint32_t>("rank");
    ad::Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(r.read<std::uint32_t>("dimension"));
    std::vector<Real> values(ad::numel(shape));
    r.bytes(reinterpret_cast<char*>(values.data()), values.size() * sizeof(Real), "tensor values");
    contents.params.add(std::move(name), ad::Tensor<Real>(std::move(shape), std::move(values)));
  }
  return contents;
}

template <typename Real>
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& config,
                     const ad::ParameterSet<Real>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(out, config, params);
}

template <typename Real>
CheckpointContents<Real> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint '" + path.string() + "'");
  return read_checkpoint<Real>(in);
}

#define DRE_INSTANTIATE_CHECKPOINT(Real)                                                      \
  template void write_checkpoint<Real>(std::ostream&, const nlohmann::json&,                 \
                                       const ad::ParameterSet<Real>&);                       \
  template CheckpointContents<Real> read_checkpoint<Real>(std::istream&);                    \
  template void save_checkpoint<Real>(const std::filesystem::path&, const nlohmann::json&,   \
                                      const ad::ParameterSet<Real>&);                        \
  template CheckpointContents<Real> load_checkpoint<Real>(const std::filesystem::path&);

DRE_INSTANTIATE_CHECKPOINT(float)
DRE_INSTANTIATE_CHECKPOINT(double)

#undef DRE_INSTANTIATE_CHECKPOINT

}  // namespace dre::model
