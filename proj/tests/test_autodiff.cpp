#include <cmath>
#include <vector>

#include "doctest.h"
#include "mgv/grad_check.hpp"
#include "mgv/ops.hpp"
#include "mgv/rng.hpp"
#include "mgv/tape.hpp"

using namespace mgv;

TEST_CASE("backward of sum is all ones") {
  Tape tape;
  Tensor x(2, 3, {1, 2, 3, 4, 5, 6});
  tape.watch(x);
  Tensor loss = sum(&tape, x);
  Gradients g = backward(tape, loss);
  for (int i = 0; i < x.size(); ++i) CHECK(g.wrt(x)[i] == 1.0);
}

TEST_CASE("backward of dot matches hand case") {
  Tape tape;
  Tensor x(2, 1, {2, 3});
  Tensor y(2, 1, {4, 5});
  tape.watch(x);
  tape.watch(y);
  Tensor loss = dot(&tape, x, y);
  Gradients g = backward(tape, loss);
  CHECK(g.wrt(x)[0] == doctest::Approx(4.0));
  CHECK(g.wrt(x)[1] == doctest::Approx(5.0));
  CHECK(g.wrt(y)[0] == doctest::Approx(2.0));
  CHECK(g.wrt(y)[1] == doctest::Approx(3.0));
}

TEST_CASE("backward of squared norm") {
  Tape tape;
  Tensor x(2, 1, {1, 2});
  tape.watch(x);
  Tensor loss = square(&tape, l2_norm(&tape, x));
  Gradients g = backward(tape, loss);
  CHECK(g.wrt(x)[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(g.wrt(x)[1] == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("backward rejects non-scalar loss and foreign tensors") {
  Tape tape;
  Tensor x(2, 2);
  tape.watch(x);
  Tensor notScalar = add(&tape, x, x);
  CHECK_THROWS_AS(backward(tape, notScalar), std::invalid_argument);
  Tensor off = Tensor::scalar(1.0);
  CHECK_THROWS_AS(backward(tape, off), std::invalid_argument);
}

TEST_CASE("gradient of unused input is zero") {
  Tape tape;
  Tensor x(2, 1, {1, 2});
  Tensor unused(3, 1, {7, 8, 9});
  tape.watch(x);
  tape.watch(unused);
  Tensor loss = sum(&tape, x);
  Gradients g = backward(tape, loss);
  for (int i = 0; i < unused.size(); ++i) CHECK(g.wrt(unused)[i] == 0.0);
}

TEST_CASE("backward is linear over summed losses") {
  Rng rng(17);
  Tensor x0 = sample_gaussian(rng, 3, 1);

  auto grad_of = [&](auto make_loss) {
    Tape tape;
    Tensor x = x0;
    tape.watch(x);
    Tensor loss = make_loss(tape, x);
    return backward(tape, loss).wrt(x);
  };
  Tensor g1 = grad_of([](Tape& t, Tensor& x) { return sum(&t, square(&t, x)); });
  Tensor g2 = grad_of([](Tape& t, Tensor& x) { return l2_norm(&t, x); });
  Tensor g12 = grad_of([](Tape& t, Tensor& x) {
    return add(&t, sum(&t, square(&t, x)), l2_norm(&t, x));
  });
  for (int i = 0; i < x0.size(); ++i)
    CHECK(g12[i] == doctest::Approx(g1[i] + g2[i]).epsilon(1e-12));
}

TEST_CASE("grad_check of a constant function is zero") {
  auto f = [](Tape*, const Tensor&) { return Tensor::scalar(3.5); };
  // A constant never touches the tape; gradient and finite differences are both zero.
  Tape tape;
  Tensor x(3, 1, {1, 2, 3});
  tape.watch(x);
  Tensor zero = scalar_mul(&tape, sum(&tape, x), 0.0);
  Gradients g = backward(tape, zero);
  for (int i = 0; i < 3; ++i) CHECK(g.wrt(x)[i] == 0.0);
  CHECK(f(nullptr, x).value() == 3.5);
}

TEST_CASE("grad_check on softmax cross entropy") {
  Rng rng(23);
  Tensor logits = sample_gaussian(rng, 5, 1);
  auto f = [](Tape* tp, const Tensor& x) {
    Tensor s = softmax(tp, x, 0);
    Tensor target(5, 1, {0, 0, 1, 0, 0});
    return negate(tp, sum(tp, mul(tp, target, mgv::log(tp, s))));
  };
  CHECK(grad_check(f, logits, 1e-5) < 1e-4);
}

TEST_CASE("grad_check on hinge away from kinks") {
  Rng rng(29);
  Tensor x = sample_gaussian(rng, 4, 1);
  for (int i = 0; i < x.size(); ++i)
    if (std::abs(x[i]) < 1e-3) x[i] = 0.5;  // keep clear of the kink
  auto f = [](Tape* tp, const Tensor& v) { return sum(tp, hinge(tp, v)); };
  CHECK(grad_check(f, x, 1e-5) < 1e-4);
}

TEST_CASE("grad_check sweep over differentiable kernels") {
  Rng rng(31);
  auto rand_pt = [&](int r, int c) {
    Tensor t = sample_gaussian(rng, r, c);
    return t;
  };
  auto positive_pt = [&](int r, int c) {
    Tensor t = sample_gaussian(rng, r, c);
    for (int i = 0; i < t.size(); ++i) t[i] = std::abs(t[i]) + 0.2;
    return t;
  };

  for (int trial = 0; trial < 20; ++trial) {
    const int r = 2 + rng.uniform_int(4);  // dims <= 6
    const int c = 1 + rng.uniform_int(5);

    Tensor other = rand_pt(c, r);
    auto f_matmul = [&other](Tape* tp, const Tensor& x) {
      return sum(tp, matmul(tp, x, other));
    };
    CHECK(grad_check(f_matmul, rand_pt(r, c), 1e-5) < 1e-4);

    auto f_tanh = [](Tape* tp, const Tensor& x) { return sum(tp, tanh(tp, x)); };
    CHECK(grad_check(f_tanh, rand_pt(r, c), 1e-5) < 1e-4);

    auto f_softplus = [](Tape* tp, const Tensor& x) { return sum(tp, softplus(tp, x)); };
    CHECK(grad_check(f_softplus, rand_pt(r, c), 1e-5) < 1e-4);

    auto f_exp = [](Tape* tp, const Tensor& x) { return sum(tp, mgv::exp(tp, x)); };
    CHECK(grad_check(f_exp, rand_pt(r, c), 1e-5) < 1e-4);

    auto f_log = [](Tape* tp, const Tensor& x) { return sum(tp, mgv::log(tp, x)); };
    CHECK(grad_check(f_log, positive_pt(r, c), 1e-5) < 1e-4);

    auto f_sm0 = [](Tape* tp, const Tensor& x) {
      Tensor s = softmax(tp, x, 0);
      return sum(tp, square(tp, s));
    };
    CHECK(grad_check(f_sm0, rand_pt(r, c), 1e-5) < 1e-4);

    auto f_sm1 = [](Tape* tp, const Tensor& x) {
      Tensor s = softmax(tp, x, 1);
      return sum(tp, square(tp, s));
    };
    CHECK(grad_check(f_sm1, rand_pt(r, c), 1e-5) < 1e-4);

    auto f_means = [](Tape* tp, const Tensor& x) {
      return add(tp, sum(tp, square(tp, row_mean(tp, x))), sum(tp, square(tp, col_mean(tp, x))));
    };
    CHECK(grad_check(f_means, rand_pt(r, c), 1e-5) < 1e-4);

    Tensor bias = rand_pt(r, 1);
    auto f_bias = [&bias](Tape* tp, const Tensor& x) {
      return sum(tp, square(tp, bias_add(tp, x, bias)));
    };
    CHECK(grad_check(f_bias, rand_pt(r, c), 1e-5) < 1e-4);

    Tensor scales = rand_pt(1, c);
    auto f_scale = [&scales](Tape* tp, const Tensor& x) {
      return sum(tp, square(tp, row_scale(tp, x, scales)));
    };
    CHECK(grad_check(f_scale, rand_pt(r, c), 1e-5) < 1e-4);

    auto f_norm = [](Tape* tp, const Tensor& x) { return l2_norm(tp, x); };
    CHECK(grad_check(f_norm, positive_pt(r, c), 1e-5) < 1e-4);

    auto f_slices = [r, c](Tape* tp, const Tensor& x) {
      Tensor top = slice_rows(tp, x, 0, std::max(1, r / 2));
      Tensor left = slice_cols(tp, x, 0, std::max(1, c / 2));
      return add(tp, sum(tp, square(tp, top)), sum(tp, square(tp, left)));
    };
    CHECK(grad_check(f_slices, rand_pt(r, c), 1e-5) < 1e-4);

    Tensor mate = rand_pt(r, c);
    auto f_binary = [&mate](Tape* tp, const Tensor& x) {
      Tensor combo = add(tp, mul(tp, x, mate), sub(tp, x, mate));
      return sum(tp, square(tp, combo));
    };
    CHECK(grad_check(f_binary, rand_pt(r, c), 1e-5) < 1e-4);

    auto f_concat = [&mate](Tape* tp, const Tensor& x) {
      Tensor cr = concat_rows(tp, x, mate);
      Tensor cc = concat_cols(tp, x, mate);
      return add(tp, sum(tp, square(tp, cr)), sum(tp, square(tp, cc)));
    };
    CHECK(grad_check(f_concat, rand_pt(r, c), 1e-5) < 1e-4);

    auto f_xlogx = [](Tape* tp, const Tensor& x) { return sum(tp, xlogx(tp, x)); };
    CHECK(grad_check(f_xlogx, positive_pt(r, c), 1e-5) < 1e-4);

    auto f_trans = [](Tape* tp, const Tensor& x) {
      return sum(tp, square(tp, transpose(tp, x)));
    };
    CHECK(grad_check(f_trans, rand_pt(r, c), 1e-5) < 1e-4);
  }

  // diag and embed lookups
  Tensor sq = rand_pt(4, 4);
  auto f_diag = [](Tape* tp, const Tensor& x) { return sum(tp, square(tp, diag(tp, x))); };
  CHECK(grad_check(f_diag, sq, 1e-5) < 1e-4);

  std::vector<int> ids{2, 0, 2, 1};
  auto f_embed = [&ids](Tape* tp, const Tensor& emb) {
    return sum(tp, square(tp, embed_cols(tp, emb, ids)));
  };
  CHECK(grad_check(f_embed, rand_pt(3, 5), 1e-5) < 1e-4);
}

TEST_CASE("sample_gaussian determinism and moments") {
  Rng a(1234), b(1234);
  Tensor ta = sample_gaussian(a, 10, 10);
  Tensor tb = sample_gaussian(b, 10, 10);
  CHECK(ta.values() == tb.values());

  Rng r(777);
  const int n = 100000;
  double mean = 0.0, var = 0.0;
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) {
    xs[i] = r.normal();
    mean += xs[i];
  }
  mean /= n;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= n;
  CHECK(std::abs(mean) < 0.02);       // 5 sigma / sqrt(n)
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("rng state restore replays the stream") {
  Rng r(5);
  (void)r.normal();
  const uint64_t seed = r.seed(), counter = r.counter();
  const double next1 = r.normal();
  Rng r2(0);
  r2.restore(seed, counter);
  CHECK(r2.normal() == next1);
}
