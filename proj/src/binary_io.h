// Copyright 2026 The eend Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Little-endian byte encoding shared by the parameter file and the
// optimizer-state sidecar. Tensor records are: u64 name length, name,
// u64 rank, u64 dims, raw f64 values.

#ifndef EEND_SRC_BINARY_IO_H_
#define EEND_SRC_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eend/errors.h"
#include "eend/params.h"
#include "eend/tensor.h"

namespace eend::internal {

static_assert(std::endian::native == std::endian::little,
              "binary files are written in host byte order");

// Little-endian byte writer and bounds-checked reader.
class Writer {
 public:
  template <typename T>
  void Put(T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    bytes_.insert(bytes_.end(), b, b + sizeof(T));
  }
  void PutBytes(std::string_view s) { bytes_.insert(bytes_.end(), s.begin(), s.end()); }
  std::vector<unsigned char> Take() { return std::move(bytes_); }

  void PutParams(const ParamSet& params) {
    Put<std::uint64_t>(params.size());
    for (const auto& [name, value] : params.entries()) {
      Put<std::uint64_t>(name.size());
      PutBytes(name);
      Put<std::uint64_t>(value.rank());
      for (std::size_t d : value.shape()) Put<std::uint64_t>(d);
      for (Real v : value.values()) Put<Real>(v);
    }
  }

 private:
  std::vector<unsigned char> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}
  template <typename T>
  T Get(const std::string& what) {
    Need(sizeof(T), what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string GetString(std::uint64_t n, const std::string& what) {
    Need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void GetReals(std::span<Real> out, const std::string& what) {
    Need(out.size_bytes(), what);
    std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
    pos_ += out.size_bytes();
  }
  bool done() const { return pos_ == bytes_.size(); }

  ParamSet GetParams() {
    ParamSet params;
    const auto count = Get<std::uint64_t>("tensor count");
    for (std::uint64_t i = 0; i < count; ++i) {
      const std::string rec = "tensor record " + std::to_string(i);
      const auto name_len = Get<std::uint64_t>(rec + " name length");
      const std::string name = GetString(name_len, rec + " name");
      const std::string where = rec + " (" + name + ")";
      const auto rank = Get<std::uint64_t>(where + " rank");
      if (rank > 8) throw FormatError(where + ": implausible rank " + std::to_string(rank));
      Shape shape;
      for (std::uint64_t k = 0; k < rank; ++k) shape.push_back(Get<std::uint64_t>(where + " dims"));
      std::size_t n = 1;
      for (std::size_t d : shape) {
        if (d != 0 && n > bytes_.size() / d) throw FormatError(where + ": implausible shape");
        n *= d;
      }
      if (n > bytes_.size()) throw FormatError(where + ": implausible shape");
      Tensor t(shape);
      GetReals(t.values(), where + " data");
      if (params.contains(name)) throw FormatError(where + ": duplicate name");
      params.Add(name, std::move(t));
    }
    return params;
  }

 private:
  void Need(std::uint64_t n, const std::string& what) const {
    if (n > bytes_.size() - pos_) {
      throw FormatError("file truncated in " + what + " (need " + std::to_string(n) +
                        " bytes at offset " + std::to_string(pos_) + ", have " +
                        std::to_string(bytes_.size() - pos_) + ")");
    }
  }
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace eend::internal

#endif  // EEND_SRC_BINARY_IO_H_
