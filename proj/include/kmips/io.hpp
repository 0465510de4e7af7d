// Copyright 2026 The kmips Authors.
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

#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "kmips/error.hpp"

namespace kmips {

// Little-endian binary stream helpers. All on-disk formats in this project
// are little-endian regardless of host order.

class BinWriter {
  public:
    explicit BinWriter(const std::string& path)
        : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
        if (!out_) throw IoError("cannot open for writing: " + path);
    }

    void u8(std::uint8_t v) { raw(&v, 1); }
    void u32(std::uint32_t v) { put_le(v); }
    void u64(std::uint64_t v) { put_le(v); }
    void f32(float v) { put_le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { put_le(std::bit_cast<std::uint64_t>(v)); }
    void magic(const char (&m)[5]) { raw(m, 4); }

    void f32_block(std::span<const float> v) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(v.data(), v.size() * sizeof(float));
        } else {
            for (float x : v) f32(x);
        }
    }
    void f64_block(std::span<const double> v) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(v.data(), v.size() * sizeof(double));
        } else {
            for (double x : v) f64(x);
        }
    }
    void u32_block(std::span<const std::uint32_t> v) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(v.data(), v.size() * sizeof(std::uint32_t));
        } else {
            for (auto x : v) u32(x);
        }
    }

    void close() {
        out_.close();
        if (!out_) throw IoError("write failed: " + path_);
    }

  private:
    template <typename T>
    void put_le(T v) {
        std::uint8_t buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<std::uint8_t>(v >> (8 * i));
        raw(buf, sizeof(T));
    }
    void raw(const void* p, std::size_t bytes) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(bytes));
        if (!out_) throw IoError("write failed: " + path_);
    }

    std::string path_;
    std::ofstream out_;
};

class BinReader {
  public:
    explicit BinReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw IoError("cannot open: " + path);
    }

    std::uint8_t u8() {
        std::uint8_t v;
        raw(&v, 1);
        return v;
    }
    std::uint32_t u32() { return get_le<std::uint32_t>(); }
    std::uint64_t u64() { return get_le<std::uint64_t>(); }
    float f32() { return std::bit_cast<float>(get_le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }

    void expect_magic(const char (&m)[5]) {
        char buf[4];
        raw(buf, 4);
        if (buf[0] != m[0] || buf[1] != m[1] || buf[2] != m[2] || buf[3] != m[3])
            throw FormatError("bad magic in " + path_);
    }

    void f32_block(std::span<float> v) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(v.data(), v.size() * sizeof(float));
        } else {
            for (float& x : v) x = f32();
        }
    }
    void f64_block(std::span<double> v) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(v.data(), v.size() * sizeof(double));
        } else {
            for (double& x : v) x = f64();
        }
    }
    void u32_block(std::span<std::uint32_t> v) {
        if constexpr (std::endian::native == std::endian::little) {
            raw(v.data(), v.size() * sizeof(std::uint32_t));
        } else {
            for (auto& x : v) x = u32();
        }
    }

    bool at_eof() {
        in_.peek();
        return in_.eof();
    }

    const std::string& path() const { return path_; }

  private:
    template <typename T>
    T get_le() {
        std::uint8_t buf[sizeof(T)];
        raw(buf, sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
        return v;
    }
    void raw(void* p, std::size_t bytes) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(bytes));
        if (static_cast<std::size_t>(in_.gcount()) != bytes)
            throw LengthError("truncated file: " + path_);
    }

    std::string path_;
    std::ifstream in_;
};

}  // namespace kmips
