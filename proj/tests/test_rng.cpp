#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "extval/rng.hpp"
#include "extval/stats.hpp"

using extval::RandomStream;

TEST_CASE("same seed reproduces the same sequence") {
  RandomStream a(123);
  RandomStream b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds diverge immediately") {
  RandomStream a(1);
  RandomStream b(2);
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("fork depends on the key only, not on consumption") {
  RandomStream consumed(77);
  for (int i = 0; i < 13; ++i) consumed.next_u64();
  RandomStream fresh(77);
  RandomStream f1 = consumed.fork(5);
  RandomStream f2 = fresh.fork(5);
  for (int i = 0; i < 32; ++i) CHECK(f1.next_u64() == f2.next_u64());
}

TEST_CASE("distinct fork tags give distinct streams") {
  RandomStream root(9);
  RandomStream a = root.fork(0);
  RandomStream b = root.fork(1);
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("forked substream differs from its parent") {
  RandomStream root(9);
  RandomStream child = root.fork(0);
  CHECK(root.next_u64() != child.next_u64());
}

TEST_CASE("uniform01 stays strictly inside (0,1)") {
  RandomStream s(2024);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal equals the inverse CDF of the next uniform") {
  RandomStream a(55);
  RandomStream b(55);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform01();
    CHECK(b.normal() == extval::normal_quantile(u));
  }
}

TEST_CASE("normal draws have the right first two moments") {
  RandomStream s(31415);
  const int n = 200000;
  std::vector<double> xs(n);
  for (double& x : xs) x = s.normal();
  CHECK(std::abs(extval::mean(xs)) < 0.02);           // SE ~ 0.0022
  CHECK(std::abs(extval::sample_sd(xs) - 1.0) < 0.02);  // SE ~ 0.0016
}
