#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hrqsum::cli {

/// Runs one subcommand (fit, encode, summarize, eval, inspect, bench, embed,
/// pairs). Returns the process exit status; failures print a single JSON
/// line {"error": kind, "message": text} to `err` and leave no partial
/// outputs behind.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

int main(int argc, char** argv);

}  // namespace hrqsum::cli
