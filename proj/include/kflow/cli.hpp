#pragma once

#include "kflow/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kflow::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes are part of the command-line contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSchema = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr int kExitConsistency = 4;

struct Overrides {
    std::optional<double> tol_kernel;
    std::optional<double> tol_gap;
    std::optional<int> max_depth;
    std::optional<std::uint64_t> seed;
};

struct TaskResult {
    io::json report;
    std::string tracks_csv;  // empty unless the task produces eigenvalue tracks
};

/// Runs one task document. Throws io::SchemaError / kflow errors.
TaskResult run_task(const io::json& doc, const Overrides& overrides = {}, bool want_tracks = false);

/// Model generators; the result is itself a runnable task document.
io::json generate_dirac(int m, int k);
io::json generate_crossing(int n, const std::vector<int>& crossings, std::uint64_t seed, double weight);
io::json generate_weighted(const std::vector<int>& dims, const std::vector<double>& weights,
                           const std::vector<bool>& ideal);

/// Full command line (args[0] is the program name). Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kflow::cli
