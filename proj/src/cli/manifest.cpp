#include "mjls/cli/manifest.hpp"

#include <openssl/evp.h>

#include <json.hpp>

#include <array>
#include <cstdio>

#include "mjls/errors.hpp"

namespace mjls::cli {

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest computation failed");
    }
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string RunManifest::to_json() const {
    nlohmann::json doc{{"command", command},         {"arguments", arguments},
                       {"tool_version", tool_version}, {"model_digest", model_digest},
                       {"timings", timings},         {"result_digest", result_digest}};
    return doc.dump(2);
}

}  // namespace mjls::cli
