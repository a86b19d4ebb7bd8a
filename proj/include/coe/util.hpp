#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace coe {

using Complex = std::complex<double>;

/// Mixes a base seed with a stream index so that every ensemble member or
/// trial owns an independent, reproducible PRNG stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

/// Caps the number of worker threads used by the frequency and ensemble
/// loops.  0 restores the hardware default.  Results never depend on this.
void set_thread_cap(int threads);
int thread_cap();

/// Static-schedule parallel loop over [0, n).  The body must write only to
/// slots owned by its index; reductions are done by the caller afterwards so
/// that results are identical for every thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Same loop, but body exceptions are captured and the lowest-index one is
/// rethrown once every iteration has finished.
void parallel_for_guarded(std::size_t n, const std::function<void(std::size_t)>& body);

/// Shortest round-trip decimal formatting; used everywhere a number reaches
/// a report or CSV so identical runs emit identical bytes.
std::string format_double(double v);
std::string format_complex(Complex v);

/// Parses "1.5", "-2e3", or "(re,im)" into a complex value.
Complex parse_complex(std::string_view text);

double sup_norm_default_tolerance();

}  // namespace coe
