// Copyright starmm contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "starmm/error.hpp"

namespace starmm {

enum class AccessKind : std::uint8_t { Read = 0, Write = 1 };

struct Access {
  std::uint64_t address;
  AccessKind kind;

  friend bool operator==(const Access&, const Access&) = default;
};

// Receives every element access of a serial instrumented execution. Addresses
// are element indices into one flat address space handed out by `reserve`.
class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_access(std::uint64_t address, AccessKind kind) = 0;

  // Bump allocation of a fresh address range; never reused.
  std::uint64_t reserve(std::uint64_t elements) {
    std::uint64_t base = next_;
    next_ += elements;
    return base;
  }

  std::uint64_t reserved() const noexcept { return next_; }

  void read(std::uint64_t address) { on_access(address, AccessKind::Read); }
  void write(std::uint64_t address) { on_access(address, AccessKind::Write); }

 private:
  std::uint64_t next_ = 0;
};

using AccessTrace = std::vector<Access>;

class RecordingSink final : public TraceSink {
 public:
  void on_access(std::uint64_t address, AccessKind kind) override { trace.push_back({address, kind}); }
  AccessTrace trace;
};

// Number of distinct addresses touched by a trace.
inline std::uint64_t distinct_addresses(const AccessTrace& trace) {
  std::uint64_t top = 0;
  for (const auto& a : trace) top = std::max(top, a.address + 1);
  std::vector<bool> seen(top, false);
  std::uint64_t count = 0;
  for (const auto& a : trace) {
    if (!seen[a.address]) {
      seen[a.address] = true;
      ++count;
    }
  }
  return count;
}

// Binary dump: packed little-endian records of (u64 address, u8 kind).
inline void write_trace(const std::string& path, const AccessTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::InternalError, "cannot open trace file for writing: " + path);
  for (const auto& a : trace) {
    unsigned char rec[9];
    for (int i = 0; i < 8; ++i) rec[i] = static_cast<unsigned char>(a.address >> (8 * i));
    rec[8] = static_cast<unsigned char>(a.kind);
    out.write(reinterpret_cast<const char*>(rec), sizeof rec);
  }
  if (!out) fail(ErrorCode::InternalError, "short write on trace file: " + path);
}

inline AccessTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::InternalError, "cannot open trace file: " + path);
  AccessTrace trace;
  unsigned char rec[9];
  while (in.read(reinterpret_cast<char*>(rec), sizeof rec)) {
    std::uint64_t address = 0;
    for (int i = 0; i < 8; ++i) address |= std::uint64_t{rec[i]} << (8 * i);
    require(rec[8] <= 1, ErrorCode::InternalError, "corrupt trace record");
    trace.push_back({address, static_cast<AccessKind>(rec[8])});
  }
  require(in.gcount() == 0, ErrorCode::InternalError, "truncated trace file");
  return trace;
}

}  // namespace starmm
