#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "aed/models.hpp"
#include "aed/tensor.hpp"

// Checkpoint container. On-disk layout (all integers little-endian):
//
//   magic "AEDC"
//   u32 version (currently 1)
//   u8  precision tag: 32 or 64 (bits per scalar)
//   u32 role length, role bytes (generator / predictor / discriminator / ...)
//   u32 meta count, then per entry: u32 key len, key, u32 value len, value
//   u32 tensor count, then per tensor:
//       u32 name length, UTF-8 name, u32 rank, u64 dims[rank],
//       raw little-endian IEEE-754 payload
//   u32 CRC32 (IEEE) over every byte after the magic, up to this field
//
// Loads are all-or-nothing: any inconsistency raises a checkpoint error.

namespace aed {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct RawCheckpoint {
  struct Entry {
    std::string name;
    std::vector<std::uint64_t> dims;
    std::vector<std::byte> payload;

    std::uint64_t numel() const {
      std::uint64_t n = 1;
      for (auto d : dims) n *= d;
      return n;
    }
  };

  std::uint32_t version = kCheckpointVersion;
  Precision precision = Precision::f64;
  std::string role;
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<Entry> tensors;

  const Entry* find(const std::string& name) const {
    for (const auto& e : tensors)
      if (e.name == name) return &e;
    return nullptr;
  }
};

void write_checkpoint(const std::filesystem::path& path, const RawCheckpoint& ckpt);
RawCheckpoint read_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32_ieee(const std::byte* data, std::size_t size);

template <class T>
RawCheckpoint::Entry tensor_entry(const std::string& name, const Tensor<T>& t) {
  RawCheckpoint::Entry e;
  e.name = name;
  for (std::size_t d : t.shape()) e.dims.push_back(d);
  e.payload.resize(t.numel() * sizeof(T));
  std::memcpy(e.payload.data(), t.data(), e.payload.size());
  return e;
}

template <class T>
Tensor<T> entry_tensor(const RawCheckpoint::Entry& e) {
  if (e.payload.size() != e.numel() * sizeof(T))
    fail(errc::checkpoint, "checkpoint tensor '" + e.name + "' byte length " +
                               std::to_string(e.payload.size()) + " does not match dims");
  std::vector<std::size_t> shape;
  for (auto d : e.dims) shape.push_back(static_cast<std::size_t>(d));
  Tensor<T> t = Tensor<T>::zeros(std::move(shape));
  std::memcpy(t.data(), e.payload.data(), e.payload.size());
  return t;
}

template <class T>
RawCheckpoint make_checkpoint(const std::string& role, const std::vector<NamedParam<T>>& params,
                              const std::vector<std::pair<std::string, Tensor<T>*>>& buffers = {},
                              std::vector<std::pair<std::string, std::string>> meta = {}) {
  RawCheckpoint ckpt;
  ckpt.precision = Tensor<T>::precision();
  ckpt.role = role;
  ckpt.meta = std::move(meta);
  for (const auto& [name, node] : params) ckpt.tensors.push_back(tensor_entry(name, node->value));
  for (const auto& [name, tensor] : buffers) ckpt.tensors.push_back(tensor_entry(name, *tensor));
  return ckpt;
}

// Restores parameter node values (and buffers) by name; every destination
// must be present with matching shape and precision.
template <class T>
void restore_params(const RawCheckpoint& ckpt, const std::vector<NamedParam<T>>& params,
                    const std::vector<std::pair<std::string, Tensor<T>*>>& buffers = {}) {
  if (ckpt.precision != Tensor<T>::precision())
    fail(errc::checkpoint, std::string("checkpoint precision ") + precision_name(ckpt.precision) +
                               " does not match requested " +
                               precision_name(Tensor<T>::precision()));
  auto fetch = [&](const std::string& name) -> const RawCheckpoint::Entry& {
    const auto* e = ckpt.find(name);
    if (!e) fail(errc::checkpoint, "checkpoint is missing tensor '" + name + "'");
    return *e;
  };
  for (const auto& [name, node] : params) {
    Tensor<T> t = entry_tensor<T>(fetch(name));
    if (!t.same_shape(node->value))
      fail(errc::checkpoint, "checkpoint tensor '" + name + "' shape " + t.shape_string() +
                                 " does not match model " + node->value.shape_string());
    node->value = std::move(t);
  }
  for (const auto& [name, tensor] : buffers) {
    Tensor<T> t = entry_tensor<T>(fetch(name));
    if (!t.same_shape(*tensor))
      fail(errc::checkpoint, "checkpoint buffer '" + name + "' shape mismatch");
    *tensor = std::move(t);
  }
}

}  // namespace aed
