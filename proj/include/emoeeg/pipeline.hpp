#pragma once

#include "emoeeg/config.hpp"
#include "emoeeg/dataio.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace emoeeg {

inline constexpr std::array<std::string_view, 6> kSubcommands = {
    "preprocess", "features", "analyze", "train", "evaluate", "compare"};

struct RunResult {
  std::vector<std::filesystem::path> artifacts;  // relative to config.out
  std::vector<std::string> notices;
  std::string summary;  // printed on stdout by the CLI
};

// Feature table for the analysis and model stages: the configured CSV, or
// features extracted from the raw recordings when no CSV is given.
LabeledDataset load_pipeline_dataset(const PipelineConfig& config);

// Runs one stage and writes <out>/<name>/... plus <out>/manifest.json.
// Throws Error on any failure.
RunResult run_subcommand(std::string_view name, const PipelineConfig& config);

// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

// Full command line handling; args exclude the program name. Returns the process exit status: 0 on success,
// 1 for pipeline errors (JSON record on `err`), 2 for usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emoeeg
