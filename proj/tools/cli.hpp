#ifndef VRPCA_TOOLS_CLI_HPP
#define VRPCA_TOOLS_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>

#include "vrpca/solvers.hpp"

namespace vrpca::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

/// Thread count taken from this variable when --threads is absent.
inline constexpr const char* kThreadsEnv = "VRPCA_NUM_THREADS";

/// Entry point of the `vrpca` tool: generate, solve, compare.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shortest round-trip decimal form, independent of the locale.
std::string format_number(double value);

/// Header: epoch,effective_passes,log10_subopt,alignment_sq,wall_ms.
/// Absent values (and wall_ms unless `with_wall` is set) are left empty.
void write_trace_csv(const ConvergenceTrace& trace, std::ostream& out, bool with_wall);

/// Effective passes at the first record with log10_subopt <= threshold.
std::optional<double> passes_to_threshold(const ConvergenceTrace& trace, double threshold);

}  // namespace vrpca::cli

#endif  // VRPCA_TOOLS_CLI_HPP
