// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

namespace cvegnn {

namespace {

constexpr char kMagic[4] = {'G', 'N', 'N', 'W'};

template <typename T>
void put_le(std::ostream& out, T v) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U u = std::bit_cast<U>(v);
  char b[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
  out.write(b, sizeof b);
}

template <typename T>
T get_le(std::istream& in, const std::filesystem::path& path) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  unsigned char b[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof b)) throw CheckpointError(path.string() + ": truncated checkpoint");
  U u = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) u |= static_cast<U>(b[i]) << (8 * i);
  return std::bit_cast<T>(u);
}

}  // namespace

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  params.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError(path.string() + ": cannot open for writing");
  out.write(kMagic, 4);
  put_le(out, static_cast<std::uint32_t>(params.num_layers()));
  for (auto d : params.dims) put_le(out, static_cast<std::uint32_t>(d));
  for (const auto& w : params.weights) {
    for (double v : w.values()) put_le(out, v);
  }
  if (!out) throw CheckpointError(path.string() + ": write failed");
}

ModelParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(path.string() + ": cannot open");
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kMagic)) {
    throw CheckpointError(path.string() + ": not a weight checkpoint");
  }
  const auto layers = get_le<std::uint32_t>(in, path);
  if (layers == 0 || layers > 64) throw CheckpointError(path.string() + ": bad layer count");
  std::vector<std::size_t> dims;
  for (std::uint32_t k = 0; k <= layers; ++k) {
    const auto d = get_le<std::uint32_t>(in, path);
    if (d == 0) throw CheckpointError(path.string() + ": zero dimension");
    dims.push_back(d);
  }
  ModelParams params = ModelParams::zeros(dims);
  for (auto& w : params.weights) {
    for (double& v : w.values()) v = get_le<double>(in, path);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError(path.string() + ": trailing bytes");
  return params;
}

}  // namespace cvegnn
