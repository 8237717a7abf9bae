#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "growthlab/delta.hpp"
#include "growthlab/errors.hpp"
#include "growthlab/interval_diffeo.hpp"

namespace growthlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Malformed command line, config, map spec or input file.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Parses `identity`, `mobius:lambda=<float>`, `poly:p=<int>,c=<float>`
/// (c defaults to 0.1) and `flatflow:file=<path>`.
DiffeoPtr parse_map(const std::string& spec);

/// Reads `key=value` lines; blank lines and lines starting with '#' are
/// skipped.
std::map<std::string, std::string> read_config(const std::string& path);

/// Appends `--key value` for every config entry whose flag is absent from
/// args.
std::vector<std::string> merge_config(
    std::vector<std::string> args,
    const std::map<std::string, std::string>& config);

/// Delta parameter document written by `delta build`.
std::string delta_document(const DeltaFunction& d, int cap);
DeltaFunction load_delta(const std::string& path);

/// Runs one command. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace growthlab::cli
