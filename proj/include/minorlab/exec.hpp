#pragma once

namespace minorlab {

// Serial drivers are the reference implementations; Parallel drivers use
// OpenMP and must produce bit-identical results.
enum class Exec { Serial, Parallel };

// Applies MINORLAB_THREADS (if set and positive) to the OpenMP runtime.
// Returns the thread count in effect.
int configure_threads_from_env();

int max_threads();

}  // namespace minorlab
