#include <doctest.h>

#include "aed/gradcheck.hpp"
#include "test_util.hpp"

using namespace aed;
using testutil::random_tensor;

namespace {
constexpr double kEps = 1e-5;
constexpr double kTol = 1e-4;
}  // namespace

TEST_CASE("linear graph y = 3x has exact analytic derivative") {
  auto x = make_param(Tensor64::scalar(1.7), "x");
  auto report = finite_diff_check([&] { return scale(x, 3.0); }, {x}, kEps);
  CHECK(report.max_rel_error <= 1e-10);
}

TEST_CASE("conv1d gradients match central differences over 20 seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = make_param(random_tensor({2, 3, 11}, seed * 10 + 1), "x");
    auto k = make_param(random_tensor({4, 3, 5}, seed * 10 + 2), "k");
    auto b = make_param(random_tensor({4}, seed * 10 + 3), "b");
    auto t = make_constant(random_tensor({2, 4, 11}, seed * 10 + 4));
    auto build = [&] {
      auto d = sub(conv1d(x, k, b, 2), t);
      return mean(mul(d, d));
    };
    auto report = finite_diff_check(build, {x, k, b}, kEps);
    CHECK(report.max_rel_error < kTol);
  }
}

TEST_CASE("maxpool gradients match central differences away from ties") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // distinct-ish entries keep the argmax stable under the probe step
    auto x = make_param(random_tensor({2, 2, 12}, seed + 100, -4.0, 4.0, 0.01), "x");
    auto build = [&] {
      auto y = maxpool1d(x, 3);
      return mean(mul(y, y));
    };
    auto report = finite_diff_check(build, {x}, 1e-6);
    CHECK(report.max_rel_error < kTol);
  }
}

TEST_CASE("dense gradients match central differences over 20 seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = make_param(random_tensor({3, 6}, seed * 7 + 1), "x");
    auto w = make_param(random_tensor({4, 6}, seed * 7 + 2), "w");
    auto b = make_param(random_tensor({4}, seed * 7 + 3), "b");
    auto t = make_constant(random_tensor({3, 4}, seed * 7 + 4));
    auto build = [&] {
      auto d = sub(dense(x, w, b), t);
      return mean(mul(d, d));
    };
    auto report = finite_diff_check(build, {x, w, b}, kEps);
    CHECK(report.max_rel_error < kTol);
  }
}

TEST_CASE("pointwise op gradients match central differences") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = make_param(random_tensor({17}, seed * 3 + 1, -2.0, 2.0, 0.05), "x");
    auto y = make_param(random_tensor({17}, seed * 3 + 2, -2.0, 2.0, 0.05), "y");

    auto relu_build = [&] { return mean(relu(x)); };
    CHECK(finite_diff_check(relu_build, {x}, kEps).max_rel_error < kTol);

    auto sig_build = [&] { return mean(mul(sigmoid(x), sigmoid(y))); };
    CHECK(finite_diff_check(sig_build, {x, y}, kEps).max_rel_error < kTol);

    auto mix_build = [&] { return mean(add(mul(x, y), scale(sub(x, y), 0.7))); };
    CHECK(finite_diff_check(mix_build, {x, y}, kEps).max_rel_error < kTol);
  }
}

TEST_CASE("log gradients match central differences on positive inputs") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = make_param(random_tensor({9}, seed + 500, 0.1, 3.0), "x");
    auto build = [&] { return mean(log_op(x)); };
    CHECK(finite_diff_check(build, {x}, kEps).max_rel_error < kTol);
  }
}

TEST_CASE("batchnorm gradients match central differences in both modes") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto x = make_param(random_tensor({3, 2, 7}, seed * 11 + 1, -2.0, 2.0), "x");
    auto g = make_param(random_tensor({2}, seed * 11 + 2, 0.5, 1.5), "g");
    auto b = make_param(random_tensor({2}, seed * 11 + 3), "b");

    auto rm = Tensor64::zeros({2});
    auto rv = Tensor64::full({2}, 1.0);
    auto train_build = [&] {
      auto rm2 = rm;  // keep buffers untouched across probe evaluations
      auto rv2 = rv;
      auto y = batchnorm1d(x, g, b, rm2, rv2, /*training=*/true);
      return mean(mul(y, y));
    };
    CHECK(finite_diff_check(train_build, {x, g, b}, kEps).max_rel_error < kTol);

    auto rm_eval = random_tensor({2}, seed * 11 + 4, -0.5, 0.5);
    auto rv_eval = random_tensor({2}, seed * 11 + 5, 0.5, 2.0);
    auto eval_build = [&] {
      auto rm2 = rm_eval;
      auto rv2 = rv_eval;
      auto y = batchnorm1d(x, g, b, rm2, rv2, /*training=*/false);
      return mean(mul(y, y));
    };
    CHECK(finite_diff_check(eval_build, {x, g, b}, kEps).max_rel_error < kTol);
  }
}

TEST_CASE("composed conv stack gradcheck (random 1x8 input, mse root)") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto x = make_param(random_tensor({1, 1, 8}, seed * 13 + 1), "x");
    auto k = make_param(random_tensor({2, 1, 3}, seed * 13 + 2), "k");
    auto b = make_param(random_tensor({2}, seed * 13 + 3), "b");
    auto t = make_constant(random_tensor({1, 2, 8}, seed * 13 + 4));
    auto build = [&] {
      auto d = sub(conv1d(x, k, b, 1), t);
      return mean(mul(d, d));
    };
    CHECK(finite_diff_check(build, {x, k, b}, kEps).max_rel_error < kTol);
  }
}
