#pragma once

#include "config.hpp"

#include "fdlpv/error.hpp"
#include "fdlpv/frf.hpp"
#include "fdlpv/synthesis.hpp"

#include <iosfwd>

namespace fdlpv::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kInfeasible = 3, kNumerical = 4 };

// Exit code for a library error.
[[nodiscard]] int exit_code(ErrorKind kind) noexcept;

// Full command line including argv[0]; messages go to `out` and `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Synthesis problem over an N_G / D_G dataset with the bases, weights and options of `config`.
[[nodiscard]] SynthesisProblem problem_from_dataset(const PipelineConfig& config, const FrfDataset& dataset);

} // namespace fdlpv::cli
