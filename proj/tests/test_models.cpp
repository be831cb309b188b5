#include <doctest.h>

#include "aed/gradcheck.hpp"
#include "aed/models.hpp"
#include "test_util.hpp"

using namespace aed;
using testutil::bitwise_equal;
using testutil::random_tensor;

namespace {

ModelConfig small_cfg(std::size_t window = 27) {
  ModelConfig cfg;
  cfg.window = window;
  cfg.predictor_hidden = {32, 16};
  cfg.discriminator_hidden = {24, 12};
  return cfg;
}

}  // namespace

TEST_CASE("generator feature length arithmetic") {
  CHECK(generator_feature_len(599) == 4950);
  CHECK(generator_feature_len(27) == 200);
  CHECK_THROWS_AS(generator_feature_len(25), Error);   // below minimum
  CHECK_THROWS_AS(generator_feature_len(28), Error);   // even
  for (std::size_t w = 27; w <= 301; w += 2)
    CHECK(generator_feature_len(w) == 50 * ((w / 3) / 2));
}

TEST_CASE("generator forward width matches the arithmetic") {
  for (std::size_t w : {27ul, 39ul, 99ul, 599ul}) {
    auto g = build_generator<double>(w, ModelConfig{}, 5);
    auto x = make_input(random_tensor({2, w}, w));
    auto f = g.forward(x);
    REQUIRE(f->value.rank() == 2);
    CHECK(f->value.dim(0) == 2);
    CHECK(f->value.dim(1) == generator_feature_len(w));
  }
}

TEST_CASE("builders are deterministic per seed") {
  auto g1 = build_generator<double>(27, ModelConfig{}, 11);
  auto g2 = build_generator<double>(27, ModelConfig{}, 11);
  auto g3 = build_generator<double>(27, ModelConfig{}, 12);
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    CHECK(bitwise_equal(g1.conv_w[l]->value, g2.conv_w[l]->value));
    CHECK(bitwise_equal(g1.conv_b[l]->value, g2.conv_b[l]->value));
  }
  CHECK(!bitwise_equal(g1.conv_w[0]->value, g3.conv_w[0]->value));

  auto p1 = build_predictor<double>(200, small_cfg(), 3);
  auto p2 = build_predictor<double>(200, small_cfg(), 3);
  CHECK(bitwise_equal(p1.stack.w[0]->value, p2.stack.w[0]->value));
}

TEST_CASE("zeroed generator maps any window to the zero feature vector") {
  auto g = build_generator<double>(27, ModelConfig{}, 5);
  for (std::size_t l = 0; l < kConvLayers; ++l) {
    g.conv_w[l]->value = Tensor64::zeros(g.conv_w[l]->value.shape());
    g.conv_b[l]->value = Tensor64::zeros(g.conv_b[l]->value.shape());
  }
  auto f = g.forward(make_input(random_tensor({1, 27}, 9)));
  for (std::size_t i = 0; i < f->value.numel(); ++i) CHECK(f->value[i] == 0.0);
}

TEST_CASE("eval-mode forward is pure and deterministic") {
  auto g = build_generator<double>(39, ModelConfig{}, 6);
  auto x = make_input(random_tensor({3, 39}, 77));
  auto f1 = g.forward(x);
  auto f2 = g.forward(x);
  CHECK(bitwise_equal(f1->value, f2->value));
  auto p = build_predictor<double>(g.feature_len(), small_cfg(), 7);
  CHECK(bitwise_equal(p.forward(f1)->value, p.forward(f2)->value));
}

TEST_CASE("generator rejects wrong window width") {
  auto g = build_generator<double>(27, ModelConfig{}, 5);
  auto bad = make_input(random_tensor({2, 29}, 1));
  CHECK_THROWS_AS(g.forward(bad), Error);
}

TEST_CASE("predictor with zeroed last layer predicts its bias") {
  auto cfg = small_cfg();
  auto p = build_predictor<double>(64, cfg, 8);
  auto& wlast = p.stack.w.back();
  wlast->value = Tensor64::zeros(wlast->value.shape());
  p.stack.b.back()->value = Tensor64::full({1}, 3.25);
  auto f = make_input(random_tensor({5, 64}, 10));
  auto y = p.forward(f);
  REQUIRE(y->value.shape() == std::vector<std::size_t>{5});
  for (std::size_t i = 0; i < 5; ++i) CHECK(y->value[i] == 3.25);
}

TEST_CASE("prediction shape follows the batch") {
  auto p = build_predictor<double>(48, small_cfg(), 12);
  auto y = p.forward(make_input(random_tensor({7, 48}, 13)));
  CHECK(y->value.shape() == std::vector<std::size_t>{7});
}

TEST_CASE("discriminator outputs lie strictly inside (0,1)") {
  auto d = build_discriminator<double>(48, small_cfg(), 21);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto y = d.forward(make_input(random_tensor({16, 48}, seed, -3.0, 3.0)));
    for (std::size_t i = 0; i < y->value.numel(); ++i) {
      CHECK(y->value[i] > 0.0);
      CHECK(y->value[i] < 1.0);
    }
  }
}

TEST_CASE("gradient flows into every parameter tensor (dead-network guard)") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto cfg = small_cfg();
    auto g = build_generator<double>(27, cfg, derive_seed(seed, 1));
    auto c = build_predictor<double>(g.feature_len(), cfg, derive_seed(seed, 2));
    auto d = build_discriminator<double>(g.feature_len(), cfg, derive_seed(seed, 3));

    auto x = make_input(random_tensor({8, 27}, derive_seed(seed, 4)));
    auto t = make_constant(random_tensor({8}, derive_seed(seed, 5)));
    auto feats = g.forward(x);
    auto diff = sub(c.forward(feats), t);
    auto pred_loss = mean(mul(diff, diff));
    auto adv_loss = mean(log_op(d.forward(feats)));
    auto loss = add(pred_loss, adv_loss);
    backward(loss);

    auto all_nonzero = [](const std::vector<NamedParam<double>>& params) {
      for (const auto& [name, node] : params) {
        REQUIRE_MESSAGE(node->grad.numel() > 0, name);
        bool any = false;
        for (std::size_t i = 0; i < node->grad.numel(); ++i) any |= (node->grad[i] != 0.0);
        CHECK_MESSAGE(any, "all-zero gradient in ", name);
      }
    };
    all_nonzero(g.params());
    all_nonzero(c.params());
    all_nonzero(d.params());
  }
}

TEST_CASE("composed generator->predictor gradients match finite differences") {
  auto cfg = small_cfg();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = build_generator<double>(27, cfg, derive_seed(seed, 10));
    auto c = build_predictor<double>(g.feature_len(), cfg, derive_seed(seed, 11));
    auto x = make_input(random_tensor({2, 27}, derive_seed(seed, 12)));
    auto t = make_constant(random_tensor({2}, derive_seed(seed, 13)));
    auto build = [&] {
      auto diff = sub(c.forward(g.forward(x)), t);
      return mean(mul(diff, diff));
    };
    std::vector<NodePtr<double>> params;
    for (auto& [name, node] : g.params()) params.push_back(node);
    for (auto& [name, node] : c.params()) params.push_back(node);
    auto report = finite_diff_check(build, params, 1e-5, /*max_coords_per_param=*/4,
                                    derive_seed(seed, 14));
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("composed generator->discriminator BCE gradients match finite differences") {
  auto cfg = small_cfg();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto g = build_generator<double>(27, cfg, derive_seed(seed, 20));
    auto d = build_discriminator<double>(g.feature_len(), cfg, derive_seed(seed, 21));
    auto x = make_input(random_tensor({2, 27}, derive_seed(seed, 22)));
    auto x2 = make_constant(random_tensor({2, g.feature_len()}, derive_seed(seed, 23)));
    auto one = make_constant(Tensor64::scalar(1.0));
    auto build = [&] {
      auto p_shared = d.forward(g.forward(x));
      auto p_specific = d.forward(x2);
      auto bce = add(mean(log_op(p_shared)), mean(log_op(sub(one, p_specific))));
      return scale(bce, -1.0);
    };
    std::vector<NodePtr<double>> params;
    for (auto& [name, node] : g.params()) params.push_back(node);
    for (auto& [name, node] : d.params()) params.push_back(node);
    auto report = finite_diff_check(build, params, 1e-5, /*max_coords_per_param=*/4,
                                    derive_seed(seed, 24));
    CHECK(report.max_rel_error < 1e-4);
  }
}

TEST_CASE("batchnorm and dropout stay architecturally wired") {
  auto cfg = small_cfg();
  cfg.batchnorm = true;
  cfg.dropout = true;
  auto g = build_generator<double>(27, cfg, 31);
  CHECK(g.params().size() == 2 * kConvLayers + 2 * kConvLayers);
  auto x = make_input(random_tensor({4, 27}, 32));
  auto f_train = g.forward(x, /*training=*/true);
  CHECK(f_train->value.dim(1) == g.feature_len());
  // training mode altered the running buffers
  bool moved = false;
  for (std::size_t i = 0; i < g.bn_mean[0].numel(); ++i) moved |= (g.bn_mean[0][i] != 0.0);
  CHECK(moved);
  auto f_eval = g.forward(x, /*training=*/false);
  CHECK(f_eval->value.dim(1) == g.feature_len());

  auto p = build_predictor<double>(g.feature_len(), cfg, 33);
  std::mt19937_64 rng(7);
  auto y_drop = p.forward(f_eval, /*training=*/true, &rng);
  auto y_eval = p.forward(f_eval);
  CHECK(y_drop->value.shape() == y_eval->value.shape());
  CHECK(!bitwise_equal(y_drop->value, y_eval->value));
}
