#pragma once

#include <string>
#include <vector>

namespace mdsum {

/// Runs one toolkit subcommand (ingest, train, finetune, summarize,
/// evaluate, gradcheck, ablate). Returns the process exit status:
/// 0 success, 1 data/runtime error, 2 usage error.
int run_command(const std::vector<std::string>& args);

}  // namespace mdsum
