#include "coe/util.hpp"

#include <omp.h>

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <stdexcept>
#include <system_error>

namespace coe {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::atomic<int> g_thread_cap{0};

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return splitmix64(splitmix64(base) ^ (0x632be59bd9b4e019ull * (index + 1)));
}

void set_thread_cap(int threads) { g_thread_cap.store(threads < 0 ? 0 : threads); }

int thread_cap() { return g_thread_cap.load(); }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  int cap = g_thread_cap.load();
  int workers = cap > 0 ? cap : omp_get_max_threads();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
#pragma omp parallel for schedule(static) num_threads(workers)
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    body(static_cast<std::size_t>(i));
  }
}

void parallel_for_guarded(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::vector<std::exception_ptr> failures(n);
  parallel_for(n, [&](std::size_t i) {
    try {
      body(i);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (auto& e : failures) {
    if (e) std::rethrow_exception(e);
  }
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf, res.ptr);
}

std::string format_complex(Complex v) {
  if (v.imag() == 0.0) return format_double(v.real());
  return "(" + format_double(v.real()) + "," + format_double(v.imag()) + ")";
}

Complex parse_complex(std::string_view text) {
  auto fail = [&] { throw std::invalid_argument("bad complex literal: " + std::string(text)); };
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) fail();
  if (text.front() == '(') {
    if (text.back() != ')') fail();
    text.remove_prefix(1);
    text.remove_suffix(1);
    auto comma = text.find(',');
    if (comma == std::string_view::npos) fail();
    double re = 0.0, im = 0.0;
    auto r1 = std::from_chars(text.data(), text.data() + comma, re);
    auto rest = text.substr(comma + 1);
    auto r2 = std::from_chars(rest.data(), rest.data() + rest.size(), im);
    if (r1.ec != std::errc() || r2.ec != std::errc()) fail();
    return {re, im};
  }
  double re = 0.0;
  auto r = std::from_chars(text.data(), text.data() + text.size(), re);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) fail();
  return {re, 0.0};
}

double sup_norm_default_tolerance() { return 1e-10; }

}  // namespace coe
