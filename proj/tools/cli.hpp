#pragma once

/// Entry point of the benchmark CLI; returns the process exit code
/// (0 success, 1 runtime error, 2 usage error).
int cli_main(int argc, const char* const* argv);
