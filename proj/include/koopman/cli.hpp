#pragma once

namespace koopman {

// Full CLI entry point; returns the process exit code
// (0 ok, 2 config, 3 I/O, 4 numerical failure).
int cli_main(int argc, const char* const* argv);

}  // namespace koopman
