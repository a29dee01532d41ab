#pragma once

namespace qsense {

// Entry point for the qsense command line tool.  Returns the process exit
// code: 0 when every requested output was written, nonzero otherwise.
int run_cli(int argc, const char* const* argv);

}  // namespace qsense
