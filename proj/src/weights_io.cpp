// Copyright 2026 pickpoint contributors
// SPDX-License-Identifier: Apache-2.0

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include "pickpoint/error.hpp"
#include "pickpoint/network.hpp"

namespace pickpoint {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'N', 'W'};

class Reader {
public:
    Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw Error("cannot open " + path.string());
    }

    void bytes(char* dst, size_t n) {
        in_.read(dst, static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in_.gcount()) != n) {
            throw Error("truncated weight file " + path_.string());
        }
    }

    uint32_t u32() {
        char b[4];
        bytes(b, 4);
        uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<uint8_t>(b[i]);
        return v;
    }

    float f32() { return std::bit_cast<float>(u32()); }

    std::string str() {
        const uint32_t n = u32();
        if (n > (1u << 20)) throw Error("corrupt weight file " + path_.string());
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

    bool at_eof() {
        in_.peek();
        return in_.eof();
    }

private:
    std::ifstream in_;
    std::filesystem::path path_;
};

void put_u32(std::ofstream& out, uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

}  // namespace

size_t TensorBlob::element_count() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return dims.empty() ? 0 : n;
}

NetworkWeights load_weights(const std::filesystem::path& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw Error("not a weight file (bad magic): " + path.string());
    }
    NetworkWeights w;
    w.version = r.u32();
    if (w.version != kWeightFormatVersion) {
        throw Error("unsupported weight format version " + std::to_string(w.version));
    }
    w.fingerprint = r.str();
    const uint32_t count = r.u32();
    for (uint32_t t = 0; t < count; ++t) {
        const std::string name = r.str();
        const uint32_t rank = r.u32();
        if (rank > 8) throw Error("corrupt weight file " + path.string());
        TensorBlob blob;
        size_t total = 1;
        for (uint32_t d = 0; d < rank; ++d) {
            blob.dims.push_back(r.u32());
            total *= blob.dims.back();
        }
        blob.values.reserve(total);
        for (size_t i = 0; i < total; ++i) blob.values.push_back(r.f32());
        w.tensors.emplace(name, std::move(blob));
    }
    if (!r.at_eof()) throw Error("trailing bytes in weight file " + path.string());
    return w;
}

void save_weights(const NetworkWeights& w, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(kMagic, 4);
    put_u32(out, w.version);
    put_u32(out, static_cast<uint32_t>(w.fingerprint.size()));
    out.write(w.fingerprint.data(), static_cast<std::streamsize>(w.fingerprint.size()));
    put_u32(out, static_cast<uint32_t>(w.tensors.size()));
    for (const auto& [name, blob] : w.tensors) {
        put_u32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<uint32_t>(blob.dims.size()));
        size_t total = blob.dims.empty() ? 0 : 1;
        for (uint32_t d : blob.dims) {
            put_u32(out, d);
            total *= d;
        }
        if (total != blob.values.size()) {
            throw Error("tensor '" + name + "': dims do not match value count");
        }
        for (double v : blob.values) {
            put_u32(out, std::bit_cast<uint32_t>(static_cast<float>(v)));
        }
    }
    if (!out) throw Error("write failed for " + path.string());
}

}  // namespace pickpoint
