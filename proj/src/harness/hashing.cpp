// Copyright (C) 2026 The jointvid Authors
// SPDX-License-Identifier: Apache-2.0

#include "harness/hashing.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include <openssl/evp.h>

#include "common/error.hpp"

namespace jointvid::harness {

namespace fs = std::filesystem;

namespace {

class Digest {
public:
    Digest() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            fail(ErrorKind::Stage, "sha256 init failed");
        }
    }
    void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_.get(), data, n); }
    void update(std::string_view s) { update(s.data(), s.size()); }
    void update_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) fail(ErrorKind::Io, "cannot read " + path);
        std::array<char, 1 << 16> buf;
        while (in) {
            in.read(buf.data(), buf.size());
            update(buf.data(), std::size_t(in.gcount()));
        }
    }
    std::string hex() {
        unsigned char md[EVP_MAX_MD_SIZE];
        unsigned int n = 0;
        EVP_DigestFinal_ex(ctx_.get(), md, &n);
        static const char* digits = "0123456789abcdef";
        std::string out;
        for (unsigned int i = 0; i < n; ++i) {
            out.push_back(digits[md[i] >> 4]);
            out.push_back(digits[md[i] & 15]);
        }
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    Digest d;
    d.update(bytes);
    return d.hex();
}

std::string sha256_file(const std::string& path) {
    Digest d;
    d.update_file(path);
    return d.hex();
}

std::string sha256_tree(const std::string& dir) {
    if (!fs::is_directory(dir)) return "";
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files.push_back(fs::relative(e.path(), dir).generic_string());
    }
    std::sort(files.begin(), files.end());
    Digest d;
    for (const auto& f : files) {
        d.update(f);
        d.update("\0", 1);
        d.update(sha256_file((fs::path(dir) / f).string()));
    }
    return d.hex();
}

double stable_fraction(std::string_view key) {
    const std::string h = sha256_hex(key);
    const uint64_t v = std::stoull(h.substr(0, 13), nullptr, 16);
    return double(v) / double(uint64_t{1} << 52);
}

}  // namespace jointvid::harness
