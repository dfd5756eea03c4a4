#pragma once

#include <string>
#include <vector>

// Command-line front end. `run_cli` takes the arguments after the program
// name in natural order and returns the process exit code (0 on success,
// nonzero with a message on stderr otherwise), so tests can drive the CLI
// in-process.
//
// Subcommands: train, predict, eval, convert, synth. Every subcommand
// accepts --config FILE (flat key=value lines; unknown keys are rejected;
// command-line flags override file values) and echoes its effective
// configuration for reproducibility.

namespace kinemotion {

int run_cli(std::vector<std::string> args);

}  // namespace kinemotion
