#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vvnet/common.hpp"
#include "vvnet/tensor.hpp"

namespace vvnet {

inline constexpr std::uint16_t kGridFormatVersion = 1;
inline constexpr std::uint16_t kCheckpointFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

namespace detail {

struct ByteWriter {
  std::string buf;

  void u16(std::uint16_t v) {
    buf.push_back(static_cast<char>(v & 0xff));
    buf.push_back(static_cast<char>((v >> 8) & 0xff));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(const void* p, std::size_t n) {
    buf.append(static_cast<const char*>(p), n);
  }
};

struct ByteReader {
  const std::string& buf;
  std::size_t pos = 0;
  std::string context;

  void need(std::size_t n) {
    require(pos + n <= buf.size(), ErrorCategory::parse, context + ": truncated file");
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint8_t>(buf[pos]) |
                      (static_cast<std::uint16_t>(static_cast<std::uint8_t>(buf[pos + 1])) << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(buf[pos + static_cast<std::size_t>(i)])) << (8 * i);
    pos += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace detail

// All file writes go through a temp file + rename so outputs are atomic.
inline void atomic_write_file(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCategory::io, "cannot open for write: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    require(out.good(), ErrorCategory::io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  require(!ec, ErrorCategory::io, "rename failed: " + path + " (" + ec.message() + ")");
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCategory::io, "cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

// ---------------------------------------------------------------------------
// Grid file "VVGR": magic, version u16, rank u16, dims (rank x u32), payload
// of 32-bit little-endian floats, row-major with the last axis fastest.

struct GridData {
  std::vector<int> dims;
  std::vector<float> values;
};

inline std::string encode_grid(const GridData& grid) {
  detail::ByteWriter w;
  w.bytes("VVGR", 4);
  w.u16(kGridFormatVersion);
  w.u16(static_cast<std::uint16_t>(grid.dims.size()));
  std::int64_t n = 1;
  for (int d : grid.dims) {
    require(d >= 0, ErrorCategory::shape, "grid dims must be non-negative");
    w.u32(static_cast<std::uint32_t>(d));
    n *= d;
  }
  require(n == static_cast<std::int64_t>(grid.values.size()), ErrorCategory::shape,
          "grid payload does not match dims");
  for (float v : grid.values) w.f32(v);
  return std::move(w.buf);
}

inline GridData decode_grid(const std::string& bytes, const std::string& what) {
  detail::ByteReader r{bytes, 0, what};
  require(r.str(4) == "VVGR", ErrorCategory::parse, what + ": bad magic, not a grid file");
  const std::uint16_t version = r.u16();
  require(version == kGridFormatVersion, ErrorCategory::parse,
          what + ": unsupported grid format version " + std::to_string(version));
  const std::uint16_t rank = r.u16();
  GridData grid;
  std::int64_t n = 1;
  for (int i = 0; i < rank; ++i) {
    grid.dims.push_back(static_cast<int>(r.u32()));
    n *= grid.dims.back();
  }
  require(static_cast<std::size_t>(n) * 4 == bytes.size() - r.pos, ErrorCategory::parse,
          what + ": payload size mismatch");
  grid.values.resize(static_cast<std::size_t>(n));
  for (auto& v : grid.values) v = r.f32();
  return grid;
}

inline void write_grid_file(const std::string& path, const GridData& grid) {
  atomic_write_file(path, encode_grid(grid));
}

inline GridData read_grid_file(const std::string& path) {
  return decode_grid(read_file_bytes(path), path);
}

// ---------------------------------------------------------------------------
// Checkpoint file "VVCK": magic, version u16, count u32, then per tensor:
// name length u32 + UTF-8 name, rank u16, dims (rank x u32), f32 payload.

struct NamedTensor {
  std::string name;
  std::vector<int> dims;
  std::vector<float> values;
};

struct Checkpoint {
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const {
    for (const auto& t : tensors)
      if (t.name == name) return &t;
    return nullptr;
  }

  const NamedTensor& get(const std::string& name) const {
    const NamedTensor* t = find(name);
    require(t != nullptr, ErrorCategory::parse, "checkpoint is missing tensor: " + name);
    return *t;
  }

  void add(NamedTensor t) {
    require(find(t.name) == nullptr, ErrorCategory::shape,
            "duplicate checkpoint tensor name: " + t.name);
    tensors.push_back(std::move(t));
  }

  template <class S>
  void add_tensor(const std::string& name, const Tensor<S>& t) {
    NamedTensor nt;
    nt.name = name;
    nt.dims = t.shape;
    nt.values.resize(t.values.size());
    for (std::size_t i = 0; i < t.values.size(); ++i)
      nt.values[i] = static_cast<float>(t.values[i]);
    add(std::move(nt));
  }

  template <class S>
  Tensor<S> get_tensor(const std::string& name) const {
    const NamedTensor& nt = get(name);
    Tensor<S> t(nt.dims);
    for (std::size_t i = 0; i < nt.values.size(); ++i)
      t.values[i] = static_cast<S>(nt.values[i]);
    return t;
  }

  void add_scalars(const std::string& name, const std::vector<float>& vals) {
    NamedTensor nt;
    nt.name = name;
    nt.dims = {static_cast<int>(vals.size())};
    nt.values = vals;
    add(std::move(nt));
  }
};

inline std::string encode_checkpoint(const Checkpoint& ck) {
  detail::ByteWriter w;
  w.bytes("VVCK", 4);
  w.u16(kCheckpointFormatVersion);
  w.u32(static_cast<std::uint32_t>(ck.tensors.size()));
  for (const auto& t : ck.tensors) {
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u16(static_cast<std::uint16_t>(t.dims.size()));
    std::int64_t n = 1;
    for (int d : t.dims) {
      w.u32(static_cast<std::uint32_t>(d));
      n *= d;
    }
    require(n == static_cast<std::int64_t>(t.values.size()), ErrorCategory::shape,
            "checkpoint tensor payload mismatch: " + t.name);
    for (float v : t.values) w.f32(v);
  }
  return std::move(w.buf);
}

inline Checkpoint decode_checkpoint(const std::string& bytes, const std::string& what) {
  detail::ByteReader r{bytes, 0, what};
  require(r.str(4) == "VVCK", ErrorCategory::parse, what + ": bad magic, not a checkpoint");
  const std::uint16_t version = r.u16();
  require(version == kCheckpointFormatVersion, ErrorCategory::parse,
          what + ": unsupported checkpoint version " + std::to_string(version));
  const std::uint32_t count = r.u32();
  Checkpoint ck;
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor t;
    t.name = r.str(r.u32());
    const std::uint16_t rank = r.u16();
    std::int64_t n = 1;
    for (int j = 0; j < rank; ++j) {
      t.dims.push_back(static_cast<int>(r.u32()));
      n *= t.dims.back();
    }
    t.values.resize(static_cast<std::size_t>(n));
    for (auto& v : t.values) v = r.f32();
    ck.add(std::move(t));
  }
  require(r.pos == bytes.size(), ErrorCategory::parse, what + ": trailing bytes");
  return ck;
}

inline void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  atomic_write_file(path, encode_checkpoint(ck));
}

inline Checkpoint read_checkpoint(const std::string& path) {
  return decode_checkpoint(read_file_bytes(path), path);
}

}  // namespace vvnet
