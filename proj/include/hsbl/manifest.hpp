#pragma once

// Run manifests. Needs libcrypto (OpenSSL) for SHA-256.

#include "io.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <map>

namespace hsbl {

inline constexpr const char* kVersion = "0.1.0";

namespace io {

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw NumericalError("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int k = 0; k < len; ++k) {
        out += hex[md[k] >> 4];
        out += hex[md[k] & 15];
    }
    return out;
}

inline std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::string config_hash;
    std::map<std::string, std::string> inputs;  // path -> sha256
    std::map<std::string, std::string> outputs; // file name -> sha256
    std::uint64_t seed = 0;
    std::string started;
    std::string finished;
    json convergence = json::object();

    json to_json() const {
        return json{{"command", command},   {"argv", argv},       {"config_hash", config_hash},
                    {"inputs", inputs},     {"outputs", outputs}, {"seed", seed},
                    {"version", kVersion},  {"started_utc", started}, {"finished_utc", finished},
                    {"convergence", convergence}};
    }

    void add_input(const std::string& path) { inputs[path] = sha256_hex(read_text(path)); }
};

} // namespace io
} // namespace hsbl
