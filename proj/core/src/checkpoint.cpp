#include <array>
#include <bit>
#include <cstring>

#include "pressmap/error.hpp"
#include "pressmap/trainer.hpp"

namespace pressmap {

namespace {

constexpr std::array<char, 5> kMagic{'P', 'O', 'P', 'M', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::istream& in) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw ValidationError("checkpoint truncated");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return static_cast<T>(v);
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

}  // namespace

void save_checkpoint(std::ostream& out, const PopModel& model) {
  out.write(kMagic.data(), kMagic.size());
  const auto& d = model.dims();
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.node_dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.edge_dim));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.hidden));
  put_le<std::uint32_t>(out, kConvLayers);
  put_le<std::uint32_t>(out, kClasses);
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(model.variant()));
  put_f64(out, model.dropout());
  const auto params = model.parameters();
  put_le<std::uint64_t>(out, params.size());
  for (double p : params) put_f64(out, p);
}

PopModel load_checkpoint(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw ValidationError("not a POPM1 checkpoint");
  ModelDims dims;
  dims.node_dim = static_cast<int>(get_le<std::uint32_t>(in));
  dims.edge_dim = static_cast<int>(get_le<std::uint32_t>(in));
  dims.hidden = static_cast<int>(get_le<std::uint32_t>(in));
  const auto layers = get_le<std::uint32_t>(in);
  const auto classes = get_le<std::uint32_t>(in);
  if (layers != kConvLayers || classes != kClasses) throw ValidationError("unsupported checkpoint layout");
  const auto variant = get_le<std::uint8_t>(in);
  if (variant > static_cast<std::uint8_t>(PpmVariant::ppm3d)) throw ValidationError("unknown variant in checkpoint");
  const double dropout = get_f64(in);
  PopModel model(dims, dropout, static_cast<PpmVariant>(variant));
  const auto count = get_le<std::uint64_t>(in);
  if (count != model.parameters().size()) throw ValidationError("checkpoint parameter count mismatch");
  auto params = model.mutable_parameters();
  for (auto& p : params) p = get_f64(in);
  return model;
}

}  // namespace pressmap
