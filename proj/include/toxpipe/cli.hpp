#pragma once

#include <cstddef>
#include <ostream>

namespace toxpipe {

// Entry point behind the `toxpipe` executable. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// TOXPIPE_THREADS if set to a positive integer, else hardware concurrency.
std::size_t worker_threads();

}  // namespace toxpipe
