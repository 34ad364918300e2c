#pragma once

// Binary tensor interchange format ("MRT1").
//
//   offset 0   4 bytes   magic "MRT1"
//   offset 4   1 byte    dtype: 1 = real64, 2 = complex128 (re, im), 3 = real32
//   offset 5   1 byte    ndim (>= 1)
//   offset 6   ndim x u32 little-endian dims
//   then       row-major payload, little-endian IEEE-754
//
// Files are written byte by byte so the layout does not depend on host endianness.

#include "error.hpp"
#include "tensor.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <variant>

namespace mocosim {

enum class DType : std::uint8_t
{
  Real64 = 1,
  Complex128 = 2,
  Real32 = 3,
};

inline constexpr std::array<char, 4> kTensorMagic{'M', 'R', 'T', '1'};

using AnyTensor = std::variant<Tensor<double>, Tensor<cx>, Tensor<float>>;

namespace detail {

template <typename T>
struct DTypeOf;
template <>
struct DTypeOf<double>
{
  static constexpr DType value = DType::Real64;
};
template <>
struct DTypeOf<cx>
{
  static constexpr DType value = DType::Complex128;
};
template <>
struct DTypeOf<float>
{
  static constexpr DType value = DType::Real32;
};

inline std::size_t element_size(DType d)
{
  switch (d) {
  case DType::Real64: return 8;
  case DType::Complex128: return 16;
  case DType::Real32: return 4;
  }
  return 0;
}

template <typename U>
void put_le(std::vector<std::uint8_t> &out, U bits)
{
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  }
}

template <typename U>
U get_le(std::uint8_t const *p)
{
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    bits |= static_cast<U>(p[b]) << (8 * b);
  }
  return bits;
}

inline void put_value(std::vector<std::uint8_t> &out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
inline void put_value(std::vector<std::uint8_t> &out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
inline void put_value(std::vector<std::uint8_t> &out, cx const &v)
{
  put_value(out, v.real());
  put_value(out, v.imag());
}

template <typename T>
T get_value(std::uint8_t const *p);
template <>
inline double get_value<double>(std::uint8_t const *p)
{
  return std::bit_cast<double>(get_le<std::uint64_t>(p));
}
template <>
inline float get_value<float>(std::uint8_t const *p)
{
  return std::bit_cast<float>(get_le<std::uint32_t>(p));
}
template <>
inline cx get_value<cx>(std::uint8_t const *p)
{
  return {get_value<double>(p), get_value<double>(p + 8)};
}

template <typename T>
Tensor<T> decode_payload(std::vector<std::size_t> dims, std::uint8_t const *p)
{
  std::size_t const n = product(dims);
  std::vector<T> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = get_value<T>(p + i * sizeof(T));
  }
  return Tensor<T>(std::move(dims), std::move(data));
}

} // namespace detail

/// Serializes a tensor to its exact on-disk byte representation.
template <typename T>
std::vector<std::uint8_t> encode_tensor(Tensor<T> const &t)
{
  if (t.rank() == 0) {
    throw InvalidArgument("cannot save a tensor with an empty dims list");
  }
  if (t.rank() > std::numeric_limits<std::uint8_t>::max()) {
    throw InvalidArgument("tensor rank exceeds 255");
  }
  if (!all_finite<T>(t.data())) {
    throw InvalidArgument("refusing to save tensor with non-finite values");
  }
  constexpr DType dtype = detail::DTypeOf<T>::value;
  std::vector<std::uint8_t> out;
  out.reserve(6 + 4 * t.rank() + detail::element_size(dtype) * t.size());
  out.insert(out.end(), kTensorMagic.begin(), kTensorMagic.end());
  out.push_back(static_cast<std::uint8_t>(dtype));
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.dims()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) {
      throw InvalidArgument("tensor dimension exceeds 32-bit range");
    }
    detail::put_le(out, static_cast<std::uint32_t>(d));
  }
  for (auto const &v : t.data()) {
    detail::put_value(out, v);
  }
  return out;
}

/// Parses bytes produced by encode_tensor. `origin` names the source in error messages.
inline AnyTensor decode_tensor(std::span<std::uint8_t const> bytes, std::string const &origin = "<memory>")
{
  using Kind = FormatError::Kind;
  if (bytes.size() < 4) {
    throw FormatError(Kind::Truncated, origin, "file shorter than the magic number");
  }
  if (!std::equal(kTensorMagic.begin(), kTensorMagic.end(), bytes.begin())) {
    throw FormatError(Kind::BadMagic, origin, "bad magic, expected MRT1");
  }
  if (bytes.size() < 6) {
    throw FormatError(Kind::Truncated, origin, "truncated header");
  }
  auto const code = bytes[4];
  if (code < 1 || code > 3) {
    throw FormatError(Kind::BadDtype, origin, "unknown dtype code " + std::to_string(code));
  }
  auto const dtype = static_cast<DType>(code);
  std::size_t const ndim = bytes[5];
  if (ndim == 0) {
    throw FormatError(Kind::BadHeader, origin, "ndim is zero");
  }
  std::size_t const header = 6 + 4 * ndim;
  if (bytes.size() < header) {
    throw FormatError(Kind::Truncated, origin, "truncated dims");
  }
  std::vector<std::size_t> dims(ndim);
  for (std::size_t i = 0; i < ndim; ++i) {
    dims[i] = detail::get_le<std::uint32_t>(bytes.data() + 6 + 4 * i);
  }
  std::size_t const expected = header + detail::element_size(dtype) * product(dims);
  if (bytes.size() < expected) {
    throw FormatError(
      Kind::Truncated, origin,
      "payload truncated: expected " + std::to_string(expected) + " bytes, found " + std::to_string(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError(Kind::TrailingData, origin, "unexpected bytes after payload");
  }
  std::uint8_t const *payload = bytes.data() + header;
  switch (dtype) {
  case DType::Real64: return detail::decode_payload<double>(std::move(dims), payload);
  case DType::Complex128: return detail::decode_payload<cx>(std::move(dims), payload);
  case DType::Real32: return detail::decode_payload<float>(std::move(dims), payload);
  }
  throw FormatError(Kind::BadDtype, origin, "unreachable dtype");
}

inline void write_bytes(std::filesystem::path const &path, std::span<std::uint8_t const> bytes)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw IoError(path.string(), "cannot open for writing");
  }
  f.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) {
    throw IoError(path.string(), "write failed");
  }
}

inline std::vector<std::uint8_t> read_bytes(std::filesystem::path const &path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError(path.string(), "cannot open for reading");
  }
  std::vector<std::uint8_t> bytes(std::istreambuf_iterator<char>(f), {});
  if (f.bad()) {
    throw IoError(path.string(), "read failed");
  }
  return bytes;
}

template <typename T>
void save_tensor(std::filesystem::path const &path, Tensor<T> const &t)
{
  write_bytes(path, encode_tensor(t));
}

template <typename T>
void save_tensor(std::filesystem::path const &path, Image<T> const &img)
{
  save_tensor(path, img.to_tensor());
}

inline void save_tensor(std::filesystem::path const &path, AnyTensor const &t)
{
  std::visit([&](auto const &v) { save_tensor(path, v); }, t);
}

inline AnyTensor load_tensor(std::filesystem::path const &path)
{
  auto const bytes = read_bytes(path);
  return decode_tensor(bytes, path.string());
}

/// Loads a real tensor; real32 payloads are widened to double.
inline Tensor<double> load_real_tensor(std::filesystem::path const &path)
{
  auto any = load_tensor(path);
  if (auto *d = std::get_if<Tensor<double>>(&any)) {
    return std::move(*d);
  }
  if (auto *f = std::get_if<Tensor<float>>(&any)) {
    std::vector<double> data(f->data().begin(), f->data().end());
    return Tensor<double>(f->dims(), std::move(data));
  }
  throw FormatError(FormatError::Kind::Unsupported, path.string(), "expected a real tensor, found complex");
}

/// Loads a complex tensor; real payloads are promoted with zero imaginary part.
inline Tensor<cx> load_complex_tensor(std::filesystem::path const &path)
{
  auto any = load_tensor(path);
  if (auto *c = std::get_if<Tensor<cx>>(&any)) {
    return std::move(*c);
  }
  return std::visit(
    [](auto const &t) {
      std::vector<cx> data(t.data().begin(), t.data().end());
      return Tensor<cx>(t.dims(), std::move(data));
    },
    any);
}

/// Loads any rank-2 tensor as a real image. Complex data is reduced to magnitude.
inline RealImage load_real_image(std::filesystem::path const &path)
{
  auto any = load_tensor(path);
  if (auto *c = std::get_if<Tensor<cx>>(&any)) {
    return magnitude(ComplexImage::from_tensor(*c));
  }
  if (auto *f = std::get_if<Tensor<float>>(&any)) {
    std::vector<double> data(f->data().begin(), f->data().end());
    return RealImage::from_tensor(Tensor<double>(f->dims(), std::move(data)));
  }
  return RealImage::from_tensor(std::get<Tensor<double>>(any));
}

inline ComplexImage load_complex_image(std::filesystem::path const &path)
{
  return ComplexImage::from_tensor(load_complex_tensor(path));
}

} // namespace mocosim
