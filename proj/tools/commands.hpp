#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aspex::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitRuntime = 3;

struct PrepareOptions {
  std::string xml;
  std::string out;
  std::string report;  // default: <out>.report.json
};

struct TrainOptions {
  std::string config;
  std::string embeddings;
  std::string train;
  std::string test;
  std::string out_dir;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

struct EvalOptions {
  std::string checkpoint;
  std::string pred;
  std::string test;
  std::string embeddings;
  std::string out;
};

struct CompareOptions {
  std::string grid;
  bool transpose = false;
  std::string out;
  std::string plot;
};

struct CoverageOptions {
  std::vector<std::string> vocab_from;
  std::string embeddings;
  std::string name;
  std::size_t dim = 300;
  std::string out;
};

int cmd_prepare(const PrepareOptions& o);
int cmd_train(const TrainOptions& o);
int cmd_eval(const EvalOptions& o);
int cmd_compare(const CompareOptions& o);
int cmd_coverage(const CoverageOptions& o);

/// Resolves an embeddings path: as given when it exists, otherwise relative
/// to $ASPEX_EMBEDDINGS_DIR.
std::string resolve_embeddings(const std::string& path);

}  // namespace aspex::cli
