#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cqg/error.hpp"
#include "cqg/kernels/weights.hpp"
#include "cqg/numerics/philox.hpp"

using namespace cqg;
using kern::WeightSums;

namespace {

constexpr double kPi = std::numbers::pi;

double total(const WeightSums& w) { return w.uu + w.ud + w.du + w.dd; }

double rel_diff(double x, double y) {
  const double scale = std::max({std::abs(x), std::abs(y), 1e-300});
  return std::abs(x - y) / scale;
}

}  // namespace

TEST_CASE("sample_uniforms: pins the counter-indexed stream layout") {
  // Sample s draws blocks (ctr_lo = s, ctr_hi = 0,1,2), two uniforms each.
  const std::uint64_t seed = 0x1234abcd5678ef01ull;
  const std::uint64_t s = 987654321;
  const auto u = kern::sample_uniforms(seed, s);
  const auto b0 = num::philox4x32(seed, s, 0);
  const auto b1 = num::philox4x32(seed, s, 1);
  const auto b2 = num::philox4x32(seed, s, 2);
  CHECK(u[0] == num::uniform_from_words(b0[0], b0[1]));
  CHECK(u[1] == num::uniform_from_words(b0[2], b0[3]));
  CHECK(u[2] == num::uniform_from_words(b1[0], b1[1]));
  CHECK(u[3] == num::uniform_from_words(b1[2], b1[3]));
  CHECK(u[4] == num::uniform_from_words(b2[0], b2[1]));
  CHECK(u[5] == num::uniform_from_words(b2[2], b2[3]));
  for (double x : u) {
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  // neighboring samples and different seeds give different draws
  CHECK(kern::sample_uniforms(seed, s) == u);
  CHECK(kern::sample_uniforms(seed, s + 1) != u);
  CHECK(kern::sample_uniforms(seed + 1, s) != u);
}

TEST_CASE("scalar kernel: bitwise deterministic") {
  const auto& k = kern::scalar_kernel();
  CHECK(std::string(k.name()) == "scalar");
  const WeightSums a = k.accumulate(42, 0, 10000, 0.3, 1.1);
  const WeightSums b = k.accumulate(42, 0, 10000, 0.3, 1.1);
  CHECK(a.uu == b.uu);
  CHECK(a.ud == b.ud);
  CHECK(a.du == b.du);
  CHECK(a.dd == b.dd);
}

TEST_CASE("scalar kernel: range partitions agree to rounding") {
  // Counter-indexed sampling makes any partition of [0, N) sum to the same
  // totals up to floating addition order.
  const auto& k = kern::scalar_kernel();
  const WeightSums whole = k.accumulate(7, 0, 1000, 0.2, 0.9);
  const WeightSums p1 = k.accumulate(7, 0, 400, 0.2, 0.9);
  const WeightSums p2 = k.accumulate(7, 400, 250, 0.2, 0.9);
  const WeightSums p3 = k.accumulate(7, 650, 350, 0.2, 0.9);
  CHECK(rel_diff(whole.uu, p1.uu + p2.uu + p3.uu) < 1e-12);
  CHECK(rel_diff(whole.ud, p1.ud + p2.ud + p3.ud) < 1e-12);
  CHECK(rel_diff(whole.du, p1.du + p2.du + p3.du) < 1e-12);
  CHECK(rel_diff(whole.dd, p1.dd + p2.dd + p3.dd) < 1e-12);
}

TEST_CASE("scalar kernel: channel means match the closed-form fluxes") {
  // E[w_uu]/N = sin^2((tb-ta)/2)/4 etc.; orientation averages kill the
  // polarization brackets.
  const auto& k = kern::scalar_kernel();
  const double ta = 0.0, tb = kPi / 3.0;
  const std::uint32_t n = 200000;
  const WeightSums w = k.accumulate(123, 0, n, ta, tb);
  const double half = 0.5 * (tb - ta);
  const double qs = 0.25 * std::sin(half) * std::sin(half);
  const double qc = 0.25 * std::cos(half) * std::cos(half);
  // sd(w_ch) ~ q * 0.88, so 4 sigma at N = 2e5 is ~5e-4 on the worst channel
  CHECK(std::abs(w.uu / n - qs) < 6e-4);
  CHECK(std::abs(w.dd / n - qs) < 6e-4);
  CHECK(std::abs(w.ud / n - qc) < 6e-4);
  CHECK(std::abs(w.du / n - qc) < 6e-4);
  CHECK(std::abs(total(w) / n - 0.5) < 1e-3);
  // correlation estimate E = (uu+dd-ud-du)/total ~ -cos(tb-ta)
  const double e = (w.uu + w.dd - w.ud - w.du) / total(w);
  CHECK(std::abs(e - (-std::cos(tb - ta))) < 0.01);
}

TEST_CASE("kernel selection") {
  CHECK(std::string(kern::select_kernel("scalar").name()) == "scalar");
  const auto names = kern::available_kernels();
  CHECK(std::find(names.begin(), names.end(), "scalar") != names.end());
  try {
    kern::select_kernel("fancy");
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ValidationError);
  }
  if (kern::simd_kernel() == nullptr) {
    // explicit simd must refuse rather than silently fall back
    try {
      kern::select_kernel("simd");
      FAIL("expected ValidationError");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ValidationError);
    }
    CHECK(std::string(kern::select_kernel("auto").name()) == "scalar");
  } else {
    CHECK(std::string(kern::select_kernel("simd").name()) == "simd");
    CHECK(std::string(kern::select_kernel("auto").name()) == "simd");
    CHECK(std::find(names.begin(), names.end(), "simd") != names.end());
  }
}

TEST_CASE("simd kernel: agrees with the scalar reference") {
  const kern::WeightKernel* simd = kern::simd_kernel();
  if (simd == nullptr) {
    MESSAGE("vector kernel unavailable on this host; equivalence not checked");
    return;
  }
  const auto& scalar = kern::scalar_kernel();
  // ranges chosen to exercise the vector body, the scalar tail, odd offsets,
  // and counts below one vector width
  struct Range {
    std::uint64_t first;
    std::uint32_t count;
  };
  const Range ranges[] = {{0, 1},      {0, 3},       {0, 8},   {5, 7},
                          {0, 1024},   {17, 1000},   {0, 4095}, {123456789, 2049},
                          {0, 100003}};
  for (const auto& r : ranges) {
    for (auto [ta, tb] : {std::pair{0.0, kPi / 4}, std::pair{0.3, 2.1}}) {
      const WeightSums a = scalar.accumulate(42, r.first, r.count, ta, tb);
      const WeightSums b = simd->accumulate(42, r.first, r.count, ta, tb);
      CHECK(rel_diff(a.uu, b.uu) < 1e-12);
      CHECK(rel_diff(a.ud, b.ud) < 1e-12);
      CHECK(rel_diff(a.du, b.du) < 1e-12);
      CHECK(rel_diff(a.dd, b.dd) < 1e-12);
    }
  }
}

TEST_CASE("kernels: coincident analyzers concentrate in opposite channels") {
  // At tb = ta the uu and dd weights vanish sample-by-sample (qs = 0).
  const auto& k = kern::scalar_kernel();
  const WeightSums w = k.accumulate(9, 0, 5000, 0.7, 0.7);
  CHECK(w.uu == 0.0);
  CHECK(w.dd == 0.0);
  CHECK(w.ud > 0.0);
  CHECK(w.du > 0.0);
}
