#pragma once

#include <string>
#include <vector>

#include "aspex/io.hpp"

namespace aspex::cli {

/// Hex SHA-256 of a file's raw bytes.
std::string sha256_file(const std::string& path);

struct InputFile {
  std::string role;
  std::string path;
};

/// Provenance block embedded in every JSON output.
struct RunManifest {
  std::string command;
  json config = json::object();
  std::vector<std::uint64_t> seeds;
  std::vector<InputFile> inputs;

  json to_json() const;
};

}  // namespace aspex::cli
