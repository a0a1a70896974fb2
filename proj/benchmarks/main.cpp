#include <benchmark/benchmark.h>

// The distro benchmark_main archive is LTO bytecode tied to one compiler build.
BENCHMARK_MAIN();
