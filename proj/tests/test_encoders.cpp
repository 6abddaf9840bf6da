#include <cstdio>

#include "doctest.h"
#include "mgv/encoders.hpp"
#include "mgv/grad_check.hpp"

using namespace mgv;

namespace {

Vocabulary tiny_vocab() {
  Vocabulary v;
  for (const char* w : {"a", "b", "c", "sports", "team"}) v.add(w);
  return v;
}

}  // namespace

TEST_CASE("tokenize MET wraps a single span") {
  Vocabulary v = tiny_vocab();
  TokenSeq s = tokenize_with_markers(v, {"a", "b"}, {{0, 0}}, Task::MET);
  CHECK(s.length() == 6);  // [CLS] [E1] a [/E1] b [SEP]
  CHECK(s.ids.front() == Vocabulary::kCls);
  CHECK(s.ids.back() == Vocabulary::kSep);
  CHECK(s.ids[1] == Vocabulary::kE1);
  CHECK(s.ids[3] == Vocabulary::kE1End);
  CHECK(s.e1_pos == 1);
}

TEST_CASE("tokenize MRE wraps two spans") {
  Vocabulary v = tiny_vocab();
  TokenSeq s = tokenize_with_markers(v, {"a", "b"}, {{0, 0}, {1, 1}}, Task::MRE);
  CHECK(s.length() == 8);  // [CLS] [E1] a [/E1] [E2] b [/E2] [SEP]
  CHECK(s.ids[4] == Vocabulary::kE2);
  CHECK(s.e2_pos == 4);
}

TEST_CASE("tokenize rejects bad inputs") {
  Vocabulary v = tiny_vocab();
  CHECK_THROWS_AS(tokenize_with_markers(v, {}, {{0, 0}}, Task::MET), std::invalid_argument);
  CHECK_THROWS_AS(tokenize_with_markers(v, {"a", "b"}, {{0, 0}}, Task::MRE),
                  std::invalid_argument);
  CHECK_THROWS_AS(tokenize_with_markers(v, {"a", "b", "c"}, {{0, 1}, {1, 2}}, Task::MRE),
                  std::invalid_argument);
  CHECK_THROWS_AS(tokenize_with_markers(v, {"zzz"}, {{0, 0}}, Task::MET, {}, false),
                  std::invalid_argument);
}

TEST_CASE("tokenize truncation never removes markers") {
  Vocabulary v = tiny_vocab();
  std::vector<std::string> longSentence(30, "a");
  // Marker near the front: truncation is fine.
  TokenSeq s = tokenize_with_markers(v, longSentence, {{0, 0}}, Task::MET);
  CHECK(s.length() == 24);
  CHECK(s.ids.back() == Vocabulary::kSep);
  // Marker at the tail: rejected instead of truncated.
  CHECK_THROWS_AS(tokenize_with_markers(v, longSentence, {{29, 29}}, Task::MET),
                  std::invalid_argument);
}

TEST_CASE("vocabulary file round trip keeps reserved ids stable") {
  Vocabulary v = tiny_vocab();
  const std::string path = "vocab_test.txt";
  v.save(path);
  Vocabulary w = Vocabulary::load(path);
  CHECK(w.size() == v.size());
  CHECK(w.id("[CLS]") == Vocabulary::kCls);
  CHECK(w.id("sports") == v.id("sports"));
  std::remove(path.c_str());
}

TEST_CASE("encode_text shape and determinism") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.d = 8;
  ParamStore params;
  Rng rng(1);
  init_encoder_params(params, cfg, v.size(), rng);
  TokenSeq s = tokenize_with_markers(v, {"a", "b"}, {{0, 0}}, Task::MET, cfg);
  Tensor t1 = encode_text(nullptr, params, cfg, s);
  Tensor t2 = encode_text(nullptr, params, cfg, s);
  CHECK(t1.rows() == cfg.d);
  CHECK(t1.cols() == s.length());
  CHECK(t1.values() == t2.values());
}

TEST_CASE("permuting tokens changes their positional components") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.d = 8;
  ParamStore params;
  Rng rng(1);
  init_encoder_params(params, cfg, v.size(), rng);
  TokenSeq ab = tokenize_with_markers(v, {"c", "a", "b"}, {{0, 0}}, Task::MET, cfg);
  TokenSeq ba = tokenize_with_markers(v, {"c", "b", "a"}, {{0, 0}}, Task::MET, cfg);
  Tensor t_ab = encode_text(nullptr, params, cfg, ab);
  Tensor t_ba = encode_text(nullptr, params, cfg, ba);
  // Column of "a" at position 5 vs 6 differs because of the position signal.
  bool differs = false;
  for (int i = 0; i < cfg.d; ++i)
    if (t_ab.at(i, 5) != t_ba.at(i, 6)) differs = true;
  CHECK(differs);
}

TEST_CASE("zero embedding table gives tanh(bias) plus position features") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.d = 4;
  ParamStore params;
  Rng rng(1);
  init_encoder_params(params, cfg, v.size(), rng);
  Tensor& emb = params.get("text.emb");
  std::fill(emb.values().begin(), emb.values().end(), 0.0);
  Tensor& w = params.get("text.W");
  std::fill(w.values().begin(), w.values().end(), 0.0);
  for (int i = 0; i < cfg.d; ++i) w.at(i, i) = 1.0;  // W = I isolates the position term
  Tensor& b = params.get("text.b");
  b[0] = 0.3;

  TokenSeq s = tokenize_with_markers(v, {"a"}, {{0, 0}}, Task::MET, cfg);
  Tensor t = encode_text(nullptr, params, cfg, s);
  // Column j = tanh(pos_j + bias); position 0 even rows are sin(0) = 0 and
  // odd rows are the damped cos(0). The damping keeps token identity, not
  // position, the dominant part of each feature.
  CHECK(t.at(0, 0) == doctest::Approx(std::tanh(0.3)).epsilon(1e-12));
  const double posAmp = t.at(1, 0);  // tanh(scale * 1.0), scale in (0, 1]
  CHECK(posAmp > 0.0);
  CHECK(posAmp <= std::tanh(1.0) + 1e-12);
  // Same damped sinusoid at every even row of column 0.
  CHECK(t.at(2, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t.at(3, 0) == doctest::Approx(posAmp).epsilon(1e-12));
}

TEST_CASE("encode_image shape, linearity and identity case") {
  EncoderConfig cfg;
  cfg.d = 4;
  cfg.d_raw = 4;
  cfg.patches = 3;
  ParamStore params;
  Rng rng(2);
  init_encoder_params(params, cfg, 5, rng);

  Tensor grid(3, 4);
  Tensor out = encode_image(nullptr, params, cfg, grid);
  CHECK(out.rows() == 4);
  CHECK(out.cols() == 3);
  // Zero grid: columns equal the position vectors.
  const Tensor& pos = params.get("img.pos");
  CHECK(out.values() == pos.values());

  // Identity projection with zero positions reproduces the input patches.
  Tensor& w = params.get("img.W");
  std::fill(w.values().begin(), w.values().end(), 0.0);
  for (int i = 0; i < 4; ++i) w.at(i, i) = 1.0;
  Tensor& p = params.get("img.pos");
  std::fill(p.values().begin(), p.values().end(), 0.0);
  Rng g(3);
  Tensor grid2 = sample_gaussian(g, 3, 4);
  Tensor out2 = encode_image(nullptr, params, cfg, grid2);
  for (int patch = 0; patch < 3; ++patch)
    for (int f = 0; f < 4; ++f) CHECK(out2.at(f, patch) == grid2.at(patch, f));

  Tensor bad(2, 4);
  CHECK_THROWS_AS(encode_image(nullptr, params, cfg, bad), std::invalid_argument);
}

TEST_CASE("extract_entity_rep picks exactly the marker columns") {
  Vocabulary v = tiny_vocab();
  const int d = 3;
  TokenSeq met = tokenize_with_markers(v, {"a", "b"}, {{0, 0}}, Task::MET);
  TokenSeq mre = tokenize_with_markers(v, {"a", "b"}, {{0, 0}, {1, 1}}, Task::MRE);

  // Distinct constant columns: column k = k * ones.
  auto constant_cols = [&](int n) {
    Tensor t(d, n);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < n; ++j) t.at(i, j) = j;
    return t;
  };
  Tensor t_met = constant_cols(met.length());
  Tensor e_met = extract_entity_rep(nullptr, t_met, met);
  CHECK(e_met.rows() == 2 * d);
  for (int i = 0; i < d; ++i) {
    CHECK(e_met[i] == 0.0);                // [CLS] column
    CHECK(e_met[d + i] == met.e1_pos + 1); // first entity token column
  }

  Tensor t_mre = constant_cols(mre.length());
  Tensor e_mre = extract_entity_rep(nullptr, t_mre, mre);
  CHECK(e_mre.rows() == 3 * d);
  for (int i = 0; i < d; ++i) CHECK(e_mre[2 * d + i] == mre.e2_pos + 1);

  TokenSeq broken = met;
  broken.e1_pos = -1;
  CHECK_THROWS_AS(extract_entity_rep(nullptr, t_met, broken), std::invalid_argument);
}

TEST_CASE("prototype pooling is the mean of exactly l+2 columns") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.d = 6;
  ParamStore params;
  Rng rng(4);
  init_encoder_params(params, cfg, v.size(), rng);

  PrototypeSet protos = encode_prototypes(nullptr, params, cfg, v,
                                          {{0, {"sports"}}, {1, {"sports"}}, {2, {"sports", "team"}}});
  CHECK(protos.count() == 3);

  // Single-token name: mean of exactly 3 columns of the encoded [CLS] w [SEP].
  TokenSeq seq;
  seq.ids = {Vocabulary::kCls, v.id("sports"), Vocabulary::kSep};
  Tensor feats = encode_text(nullptr, params, cfg, seq);
  for (int i = 0; i < cfg.d; ++i) {
    const double mean = (feats.at(i, 0) + feats.at(i, 1) + feats.at(i, 2)) / 3.0;
    CHECK(protos.proto(0)[i] == doctest::Approx(mean).epsilon(1e-12));
  }

  // Identical names give identical prototypes.
  CHECK(protos.proto(0).values() == protos.proto(1).values());

  CHECK_THROWS_AS(encode_prototypes(nullptr, params, cfg, v, {{0, {}}}), std::invalid_argument);
}

TEST_CASE("prototype access counting") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.d = 4;
  ParamStore params;
  Rng rng(4);
  init_encoder_params(params, cfg, v.size(), rng);
  PrototypeSet protos = encode_prototypes(nullptr, params, cfg, v, {{0, {"a"}}, {1, {"b"}}});
  CHECK(protos.accesses(0) == 0);
  (void)protos.proto(0);
  CHECK(protos.accesses(0) == 1);
  CHECK(protos.accesses(1) == 0);
}

TEST_CASE("encoder gradients agree with finite differences") {
  Vocabulary v = tiny_vocab();
  EncoderConfig cfg;
  cfg.d = 4;
  ParamStore params;
  Rng rng(5);
  init_encoder_params(params, cfg, v.size(), rng);
  TokenSeq s = tokenize_with_markers(v, {"a", "b"}, {{0, 0}}, Task::MET, cfg);

  // The checked point is the dense weight; embeddings and bias stay constant.
  auto fn = [&](Tape* tp, const Tensor& w) {
    ParamStore local;
    local.create("text.emb", params.get("text.emb"));
    local.create("text.W", w);  // keeps w's tape handle
    local.create("text.b", params.get("text.b"));
    Tensor feats = encode_text(tp, local, cfg, s);
    return sum(tp, square(tp, feats));
  };
  CHECK(grad_check(fn, params.get("text.W"), 1e-5) < 1e-4);
}
