#include <cmath>

#include "doctest.h"
#include "mgv/grad_check.hpp"
#include "mgv/task_head.hpp"

using namespace mgv;

namespace {

ParamStore make_params(const TaskHeadConfig& cfg, uint64_t seed = 1) {
  ParamStore p;
  Rng rng(seed);
  init_task_head_params(p, cfg, rng);
  return p;
}

}  // namespace

TEST_CASE("entity dimension per task") {
  CHECK(entity_dim_for(Task::MET, 32) == 64);
  CHECK(entity_dim_for(Task::MRE, 32) == 96);
}

TEST_CASE("zero attention weights average the token columns") {
  TaskHeadConfig cfg{.d = 2, .entity_dim = 2, .h = 3};
  ParamStore params = make_params(cfg);
  std::fill(params.get("head.Wa").values().begin(), params.get("head.Wa").values().end(), 0.0);

  Tensor h(2, 4, {1, 2, 3, 4, 10, 20, 30, 40});
  Tensor entity(2, 1, {5, 5});
  Tensor u = attention_fuse(nullptr, params, h, entity);
  CHECK(u.rows() == 2);
  CHECK(u.cols() == 1);
  CHECK(u[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(u[1] == doctest::Approx(25.0).epsilon(1e-12));
}

TEST_CASE("a single token column passes through unchanged") {
  TaskHeadConfig cfg{.d = 3, .entity_dim = 3, .h = 2};
  ParamStore params = make_params(cfg, 2);
  Tensor h(3, 1, {7, 8, 9});
  Tensor entity(3, 1, {1, 2, 3});
  Tensor u = attention_fuse(nullptr, params, h, entity);
  for (int i = 0; i < 3; ++i) CHECK(u[i] == doctest::Approx(h[i]).epsilon(1e-12));
}

TEST_CASE("attention weights follow the scoring logits") {
  // d = 1, entity contributes nothing: logits equal the token values, so
  // tokens (ln 3, 0) get weights (0.75, 0.25).
  TaskHeadConfig cfg{.d = 1, .entity_dim = 1, .h = 1};
  ParamStore params = make_params(cfg);
  params.get("head.Wa").at(0, 0) = 1.0;
  params.get("head.Wa").at(1, 0) = 0.0;
  params.get("head.ba")[0] = 0.0;

  Tensor h(1, 2, {std::log(3.0), 0.0});
  Tensor entity(1, 1, {123.0});
  Tensor u = attention_fuse(nullptr, params, h, entity);
  CHECK(u[0] == doctest::Approx(0.75 * std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("fused output stays inside the per-row hull of H") {
  TaskHeadConfig cfg{.d = 4, .entity_dim = 4, .h = 2};
  ParamStore params = make_params(cfg, 3);
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor h = sample_gaussian(rng, 4, 6);
    Tensor entity = sample_gaussian(rng, 4, 1);
    Tensor u = attention_fuse(nullptr, params, h, entity);
    for (int r = 0; r < 4; ++r) {
      double lo = h.at(r, 0), hi = h.at(r, 0);
      for (int c = 1; c < 6; ++c) {
        lo = std::min(lo, h.at(r, c));
        hi = std::max(hi, h.at(r, c));
      }
      CHECK(u[r] >= lo - 1e-9);
      CHECK(u[r] <= hi + 1e-9);
    }
  }
}

TEST_CASE("attention_fuse rejects a mismatched entity dimension") {
  TaskHeadConfig cfg{.d = 2, .entity_dim = 4, .h = 2};
  ParamStore params = make_params(cfg);
  Tensor h(2, 3);
  Tensor entity(2, 1);  // Wa expects 2 + 4 rows
  CHECK_THROWS_AS(attention_fuse(nullptr, params, h, entity), std::invalid_argument);
}

TEST_CASE("fuse_entity stacks U over E") {
  Tensor u(2, 1, {1, 2});
  Tensor e(3, 1, {3, 4, 5});
  Tensor out = fuse_entity(nullptr, u, e);
  CHECK(out.rows() == 5);
  CHECK(out[0] == 1.0);
  CHECK(out[4] == 5.0);
}

TEST_CASE("zero projections collapse to the biases") {
  TaskHeadConfig cfg{.d = 2, .entity_dim = 2, .h = 3};
  ParamStore params = make_params(cfg, 5);
  std::fill(params.get("head.W1").values().begin(), params.get("head.W1").values().end(), 0.0);
  std::fill(params.get("head.W2").values().begin(), params.get("head.W2").values().end(), 0.0);
  params.get("head.b1") = Tensor(3, 1, {1, 2, 3});
  params.get("head.b2") = Tensor(3, 1, {4, 5, 6});

  Tensor u_tilde(4, 1, {9, 9, 9, 9});
  Tensor protos(2, 5);
  SharedSpace s = project_shared(nullptr, params, u_tilde, protos);
  CHECK(s.u_hat.values() == std::vector<double>{1, 2, 3});
  for (int c = 0; c < 5; ++c)
    for (int r = 0; r < 3; ++r) CHECK(s.proto_hats.at(r, c) == params.get("head.b2")[r]);
}

TEST_CASE("scores are dot products against each prototype column") {
  Tensor u_hat(2, 1, {1, 2});
  Tensor protos(2, 3, {1, 0, 3, 0, 1, 4});  // columns (1,0), (0,1), (3,4)
  Tensor scores = score_categories(nullptr, u_hat, protos);
  CHECK(scores.rows() == 1);
  CHECK(scores.cols() == 3);
  CHECK(scores[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(scores[1] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(scores[2] == doctest::Approx(11.0).epsilon(1e-12));

  Tensor bad(3, 1);
  CHECK_THROWS_AS(score_categories(nullptr, bad, protos), std::invalid_argument);
}

TEST_CASE("ranking loss hand cases") {
  Tensor close(1, 3, {2.0, 1.5, 0.2});
  CHECK(ranking_loss(nullptr, close, 0).value() == doctest::Approx(0.5).epsilon(1e-12));

  // Five equal scores: every non-gold term contributes the full margin.
  Tensor flat = Tensor::full(1, 5, 3.0);
  CHECK(ranking_loss(nullptr, flat, 2).value() == doctest::Approx(4.0).epsilon(1e-12));

  // Comfortable margin everywhere: exactly zero.
  Tensor wide(1, 3, {5.0, 1.0, 0.0});
  CHECK(ranking_loss(nullptr, wide, 0).value() == 0.0);

  // Gold is a single category: nothing to rank against.
  Tensor only(1, 1, {0.7});
  CHECK(ranking_loss(nullptr, only, 0).value() == 0.0);

  CHECK_THROWS_AS(ranking_loss(nullptr, close, 3), std::invalid_argument);
  CHECK_THROWS_AS(ranking_loss(nullptr, Tensor(2, 2), 0), std::invalid_argument);
}

TEST_CASE("ranking loss is invariant to a common score shift") {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor scores = sample_gaussian(rng, 1, 4);
    Tensor shifted = scores;
    const double c = rng.normal();
    for (int i = 0; i < 4; ++i) shifted[i] += c;
    const int gold = static_cast<int>(rng.uniform_int(4));
    CHECK(ranking_loss(nullptr, scores, gold).value() ==
          doctest::Approx(ranking_loss(nullptr, shifted, gold).value()).epsilon(1e-9));
  }
}

TEST_CASE("predict takes the argmax with low-index tie break") {
  CHECK(predict(Tensor(1, 3, {0.1, 0.9, 0.3})) == 1);
  CHECK(predict(Tensor(1, 3, {0.5, 0.9, 0.9})) == 1);
  CHECK(predict(Tensor(1, 1, {0.0})) == 0);
  CHECK_THROWS_AS(predict(Tensor(1, 0)), std::invalid_argument);
}

TEST_CASE("head gradients agree with finite differences end to end") {
  const TaskHeadConfig cfg{.d = 3, .entity_dim = 6, .h = 4};
  ParamStore params = make_params(cfg, 7);
  Rng rng(8);
  Tensor h = sample_gaussian(rng, 3, 5);
  Tensor entity = sample_gaussian(rng, 6, 1);
  Tensor protos = sample_gaussian(rng, 3, 4);

  auto loss_with = [&](Tape* tp, const std::string& name, const Tensor& x) {
    ParamStore local;
    for (const auto& [n, e] : params) local.create(n, n == name ? x : e.value);
    Tensor u = attention_fuse(tp, local, h, entity);
    Tensor u_tilde = fuse_entity(tp, u, entity);
    SharedSpace shared = project_shared(tp, local, u_tilde, protos);
    Tensor scores = score_categories(tp, shared.u_hat, shared.proto_hats);
    return ranking_loss(tp, scores, 1);
  };

  for (const char* name : {"head.Wa", "head.W1", "head.b1", "head.W2"}) {
    auto fn = [&](Tape* tp, const Tensor& x) { return loss_with(tp, name, x); };
    CHECK(grad_check(fn, params.get(name), 1e-5) < 1e-4);
  }

  // head.b2 shifts every category score equally, which cancels inside the
  // ranking margins: its gradient is exactly zero (so a finite-difference
  // ratio would divide rounding noise by itself).
  {
    Tape tape;
    Tensor b2 = params.get("head.b2");
    tape.watch(b2);
    Tensor loss = loss_with(&tape, "head.b2", b2);
    Tensor g = backward(tape, loss).wrt(b2);
    for (int i = 0; i < g.size(); ++i) CHECK(g[i] == 0.0);
  }
}
