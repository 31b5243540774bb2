#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "adtg/parallel.hpp"
#include "adtg/rng.hpp"

using namespace adtg;

TEST_SUITE("rng") {
  TEST_CASE("same seed gives the same sequence") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  }

  TEST_CASE("uniform stays in [0, 1) with mean near one half") {
    Rng rng(1);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
      const double u = rng.uniform();
      REQUIRE(u >= 0.0);
      REQUIRE(u < 1.0);
      sum += u;
    }
    // sd of the mean is sqrt(1/12 / n)
    CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  }

  TEST_CASE("normal draws have unit variance") {
    Rng rng(2);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double z = rng.normal();
      s += z;
      s2 += z * z;
    }
    const double m = s / n;
    CHECK(std::abs(m) < 4.0 / std::sqrt(n));
    CHECK(std::abs(s2 / n - m * m - 1.0) < 4.0 * std::sqrt(2.0 / n));
  }

  TEST_CASE("uniform_index covers the range without bias") {
    Rng rng(3);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++counts[rng.uniform_index(7)];
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - n / 7.0) * (c - n / 7.0) / (n / 7.0);
    CHECK(chi2 < 22.46);  // chi-square 6 dof, p = 0.001
  }

  TEST_CASE("derived seeds depend on every coordinate") {
    std::set<std::uint64_t> seen;
    seen.insert(derive_seed(1, "a"));
    seen.insert(derive_seed(2, "a"));
    seen.insert(derive_seed(1, "b"));
    seen.insert(derive_seed(1, "a", 1));
    seen.insert(derive_seed(1, "a", 0, 1));
    seen.insert(derive_seed(1, "a", 0, 0, 1));
    seen.insert(derive_seed(1, "a", 1, 0));
    seen.insert(derive_seed(1, "a", 0, 1, 0));
    CHECK(seen.size() == 6);  // omitted indices default to zero
    CHECK(derive_seed(9, "x", 3, 4, 5) == derive_seed(9, "x", 3, 4, 5));
  }

  TEST_CASE("parallel_for results do not depend on the worker count") {
    auto run = [](int jobs) {
      std::vector<double> out(257);
      parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = make_stream(5, "pf", i).normal(); });
      return out;
    };
    const auto one = run(1);
    CHECK(run(3) == one);
    CHECK(run(16) == one);
  }

  TEST_CASE("parallel_for rethrows worker exceptions") {
    CHECK_THROWS_AS(parallel_for(50, 4,
                                 [](std::size_t i) {
                                   if (i == 17) throw std::runtime_error("boom");
                                 }),
                    std::runtime_error);
  }
}
