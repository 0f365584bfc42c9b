// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "cvegnn/graph.hpp"

namespace cvegnn {

namespace fs = std::filesystem;

DatasetError::DatasetError(const fs::path& file, std::size_t line, const std::string& what)
    : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}

DatasetError::DatasetError(const fs::path& file, const std::string& what)
    : std::runtime_error(file.string() + ": " + what), file_(file) {}

namespace {

constexpr std::array<char, 4> kFeatureMagic{'G', 'N', 'N', 'F'};

std::ifstream open_or_throw(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw DatasetError(path, "cannot open file");
  return in;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Splits on tabs/spaces (or commas when `comma`), dropping `#` comments.
std::vector<std::string_view> fields_of(std::string_view line, bool comma = false) {
  if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  std::vector<std::string_view> out;
  const char* seps = comma ? "," : " \t\r";
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const auto next = line.find_first_of(seps, pos);
    auto tok = trim(line.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
    if (!tok.empty() || comma) out.push_back(tok);
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (comma && out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

template <typename Int>
Int parse_int(std::string_view tok, const fs::path& file, std::size_t line) {
  Int value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw DatasetError(file, line, "expected an integer, got '" + std::string(tok) + "'");
  }
  return value;
}

double parse_real(std::string_view tok, const fs::path& file, std::size_t line) {
  // from_chars for double is unavailable in older libstdc++ releases.
  std::string s(tok);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v)) {
    throw DatasetError(file, line, "expected a finite real, got '" + s + "'");
  }
  return v;
}

std::uint32_t read_u32_le(std::istream& in, const fs::path& file) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DatasetError(file, "truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_u32_le(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

Matrix read_features_bin(const fs::path& path) {
  auto in = open_or_throw(path, std::ios::binary);
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kFeatureMagic) throw DatasetError(path, "bad magic (expected GNNF)");
  const std::uint32_t rows = read_u32_le(in, path);
  const std::uint32_t cols = read_u32_le(in, path);
  Matrix m(rows, cols);
  std::vector<unsigned char> buf(static_cast<std::size_t>(cols) * 4);
  for (std::uint32_t r = 0; r < rows; ++r) {
    if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
      throw DatasetError(path, "truncated payload at row " + std::to_string(r));
    }
    for (std::uint32_t c = 0; c < cols; ++c) {
      const unsigned char* b = buf.data() + 4 * c;
      const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                                 (static_cast<std::uint32_t>(b[2]) << 16) |
                                 (static_cast<std::uint32_t>(b[3]) << 24);
      const float f = std::bit_cast<float>(bits);
      if (!std::isfinite(f)) throw DatasetError(path, "non-finite value at row " + std::to_string(r));
      m(r, c) = static_cast<double>(f);
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DatasetError(path, "trailing bytes after payload");
  return m;
}

Matrix read_features_csv(const fs::path& path) {
  auto in = open_or_throw(path);
  std::vector<double> data;
  std::size_t rows = 0, cols = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto toks = fields_of(line, true);
    if (rows == 0) cols = toks.size();
    if (toks.size() != cols) {
      throw DatasetError(path, lineno, "expected " + std::to_string(cols) + " columns, got " +
                                           std::to_string(toks.size()));
    }
    for (auto t : toks) data.push_back(parse_real(trim(t), path, lineno));
    ++rows;
  }
  return Matrix(rows, cols, std::move(data));
}

std::vector<NodeId> read_id_list(const fs::path& path, std::size_t n) {
  auto in = open_or_throw(path);
  std::vector<NodeId> ids;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = fields_of(line);
    if (toks.empty()) continue;
    if (toks.size() != 1) throw DatasetError(path, lineno, "expected one node id per line");
    const auto id = parse_int<std::uint64_t>(toks[0], path, lineno);
    if (id >= n) {
      throw DatasetError(path, lineno, "node id " + std::to_string(id) + " out of range [0, " +
                                           std::to_string(n) + ")");
    }
    ids.push_back(static_cast<NodeId>(id));
  }
  return ids;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DatasetError(dir, "dataset directory does not exist");
  Dataset data;

  const auto bin = dir / "features.bin";
  const auto csv = dir / "features.csv";
  if (fs::exists(bin)) {
    data.features = read_features_bin(bin);
  } else if (fs::exists(csv)) {
    data.features = read_features_csv(csv);
  } else {
    throw DatasetError(bin, "missing file (features.csv fallback also absent)");
  }
  const std::size_t n = data.features.rows();

  const auto edges_path = dir / "edges.tsv";
  {
    auto in = open_or_throw(edges_path);
    std::vector<std::pair<NodeId, NodeId>> edges;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto toks = fields_of(line);
      if (toks.empty()) continue;
      if (toks.size() != 2) throw DatasetError(edges_path, lineno, "expected two node ids");
      const auto u = parse_int<std::uint64_t>(toks[0], edges_path, lineno);
      const auto v = parse_int<std::uint64_t>(toks[1], edges_path, lineno);
      if (u >= n || v >= n) {
        throw DatasetError(edges_path, lineno, "endpoint out of range [0, " + std::to_string(n) +
                                                   ") (node count comes from the feature rows)");
      }
      edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
    }
    data.graph = Graph::from_edges(n, edges);
  }

  const auto labels_path = dir / "labels.tsv";
  {
    auto in = open_or_throw(labels_path);
    data.split.labels.assign(n, LabeledSplit::kUnlabeled);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto toks = fields_of(line);
      if (toks.empty()) continue;
      if (toks.size() != 2) throw DatasetError(labels_path, lineno, "expected node_id and class_id");
      const auto v = parse_int<std::uint64_t>(toks[0], labels_path, lineno);
      const auto c = parse_int<std::int64_t>(toks[1], labels_path, lineno);
      if (v >= n) {
        throw DatasetError(labels_path, lineno, "node id " + std::to_string(v) + " exceeds feature row count " +
                                                    std::to_string(n));
      }
      if (c < 0 || c > std::numeric_limits<std::int32_t>::max()) {
        throw DatasetError(labels_path, lineno, "class id must be a non-negative integer");
      }
      data.split.labels[v] = static_cast<std::int32_t>(c);
    }
  }

  data.split.train = read_id_list(dir / "train.txt", n);
  data.split.val = read_id_list(dir / "val.txt", n);
  data.split.test = read_id_list(dir / "test.txt", n);
  try {
    data.split.validate();
  } catch (const std::invalid_argument& e) {
    throw DatasetError(dir, e.what());
  }
  return data;
}

void save_dataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);
  auto open_out = [](const fs::path& p, std::ios::openmode mode = std::ios::out) {
    std::ofstream out(p, mode | std::ios::trunc);
    if (!out) throw DatasetError(p, "cannot open for writing");
    return out;
  };
  {
    auto out = open_out(dir / "edges.tsv");
    for (auto [u, v] : data.graph.edge_list()) out << u << '\t' << v << '\n';
  }
  {
    auto out = open_out(dir / "features.bin", std::ios::binary);
    out.write(kFeatureMagic.data(), 4);
    write_u32_le(out, static_cast<std::uint32_t>(data.features.rows()));
    write_u32_le(out, static_cast<std::uint32_t>(data.features.cols()));
    for (double v : data.features.values()) write_u32_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  {
    auto out = open_out(dir / "labels.tsv");
    for (std::size_t v = 0; v < data.split.labels.size(); ++v) {
      if (data.split.labels[v] != LabeledSplit::kUnlabeled) out << v << '\t' << data.split.labels[v] << '\n';
    }
  }
  auto write_ids = [&](const char* name, const std::vector<NodeId>& ids) {
    auto out = open_out(dir / name);
    for (NodeId v : ids) out << v << '\n';
  };
  write_ids("train.txt", data.split.train);
  write_ids("val.txt", data.split.val);
  write_ids("test.txt", data.split.test);
}

}  // namespace cvegnn
