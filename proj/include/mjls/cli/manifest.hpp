#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mjls::cli {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Provenance record written next to every successful run.
struct RunManifest {
    std::string command;
    std::vector<std::string> arguments;
    std::string tool_version{kToolVersion};
    std::string model_digest;
    std::map<std::string, double> timings;
    std::string result_digest;

    [[nodiscard]] std::string to_json() const;
};

}  // namespace mjls::cli
