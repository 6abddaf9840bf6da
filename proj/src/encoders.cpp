#include "mgv/encoders.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mgv {

Task task_from_name(const std::string& s) {
  if (s == "met" || s == "MET") return Task::MET;
  if (s == "mre" || s == "MRE") return Task::MRE;
  throw std::invalid_argument("unknown task: " + s + " (expected met|mre)");
}

const std::vector<std::string>& Vocabulary::reserved_tokens() {
  static const std::vector<std::string> r = {"[CLS]", "[SEP]", "[E1]", "[/E1]",
                                             "[E2]", "[/E2]", "[PAD]", "[UNK]"};
  return r;
}

Vocabulary::Vocabulary() {
  for (const auto& t : reserved_tokens()) add(t);
}

int Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

int Vocabulary::id(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) throw std::invalid_argument("Vocabulary: id out of range");
  return tokens_[id];
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("Vocabulary: cannot write " + path);
  for (const auto& t : tokens_) out << t << "\n";
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Vocabulary: cannot read " + path);
  Vocabulary v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    if (lineno < kNumReserved) {
      if (line != reserved_tokens()[lineno])
        throw std::runtime_error("Vocabulary: line " + std::to_string(lineno + 1) +
                                 " must be the reserved token " + reserved_tokens()[lineno]);
    } else {
      v.add(line);
    }
    ++lineno;
  }
  return v;
}

TokenSeq tokenize_with_markers(const Vocabulary& vocab, const std::vector<std::string>& sentence,
                               const std::vector<std::pair<int, int>>& spans, Task task,
                               const EncoderConfig& cfg, bool unk_fallback) {
  if (sentence.empty()) throw std::invalid_argument("tokenize: empty sentence");
  const size_t want = task == Task::MET ? 1 : 2;
  if (spans.size() != want)
    throw std::invalid_argument("tokenize: task needs " + std::to_string(want) + " span(s), got " +
                                std::to_string(spans.size()));
  const int n = static_cast<int>(sentence.size());
  for (const auto& [b, e] : spans)
    if (b < 0 || e < b || e >= n)
      throw std::invalid_argument("tokenize: span out of range");
  if (spans.size() == 2) {
    const auto& a = spans[0];
    const auto& b = spans[1];
    const bool disjoint = a.second < b.first || b.second < a.first;
    if (!disjoint) throw std::invalid_argument("tokenize: overlapping entity spans");
  }

  auto tok_id = [&](const std::string& w) {
    int id = vocab.id(w);
    if (id < 0) {
      if (!unk_fallback) throw std::invalid_argument("tokenize: unknown token '" + w + "'");
      id = Vocabulary::kUnk;
    }
    return id;
  };

  TokenSeq seq;
  seq.task = task;
  seq.ids.push_back(Vocabulary::kCls);
  for (int i = 0; i < n; ++i) {
    for (size_t s = 0; s < spans.size(); ++s)
      if (spans[s].first == i) {
        if (s == 0) {
          seq.e1_pos = seq.length();
          seq.ids.push_back(Vocabulary::kE1);
        } else {
          seq.e2_pos = seq.length();
          seq.ids.push_back(Vocabulary::kE2);
        }
      }
    seq.ids.push_back(tok_id(sentence[i]));
    for (size_t s = 0; s < spans.size(); ++s)
      if (spans[s].second == i)
        seq.ids.push_back(s == 0 ? Vocabulary::kE1End : Vocabulary::kE2End);
  }

  // Right-truncate before [SEP]; a truncation that would drop marker content
  // is rejected instead.
  const int max_body = cfg.max_len - 1;  // room for [SEP]
  if (seq.length() > max_body) {
    int last_marker = 0;
    for (int i = 0; i < seq.length(); ++i)
      if (seq.ids[i] == Vocabulary::kE1End || seq.ids[i] == Vocabulary::kE2End) last_marker = i;
    if (last_marker >= max_body)
      throw std::invalid_argument("tokenize: sentence too long, truncation would drop an entity marker");
    seq.ids.resize(max_body);
  }
  seq.ids.push_back(Vocabulary::kSep);
  return seq;
}

void init_encoder_params(ParamStore& params, const EncoderConfig& cfg, int vocab_size, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(cfg.d));
  params.create("text.emb", sample_uniform(rng, vocab_size, cfg.d, -s, s));
  params.create("text.W", sample_uniform(rng, cfg.d, cfg.d, -s, s));
  params.create("text.b", Tensor(cfg.d, 1));
  const double si = 1.0 / std::sqrt(static_cast<double>(cfg.d_raw));
  params.create("img.W", sample_uniform(rng, cfg.d, cfg.d_raw, -si, si));
  params.create("img.pos", sample_uniform(rng, cfg.d, cfg.patches, -s, s));
}

namespace {

// Positions are deliberately quiet next to the token embeddings: with the
// full-amplitude sinusoid, a token's feature is dominated by where it sits,
// and the same word at two positions stops looking like the same word.
constexpr double kPosScale = 0.25;

Tensor sinusoidal_positions(int d, int n) {
  Tensor pos(d, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < d; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - (i % 2)) / d);
      pos.at(i, j) = kPosScale * ((i % 2 == 0) ? std::sin(j * rate) : std::cos(j * rate));
    }
  return pos;
}

}  // namespace

Tensor encode_text(Tape* tp, const ParamStore& params, const EncoderConfig& cfg,
                   const TokenSeq& seq) {
  const Tensor& emb = params.get("text.emb");
  for (int id : seq.ids)
    if (id < 0 || id >= emb.rows())
      throw std::invalid_argument("encode_text: token id outside the vocabulary");
  Tensor x = embed_cols(tp, emb, seq.ids);
  Tensor withPos = add(tp, x, sinusoidal_positions(cfg.d, seq.length()));
  return tanh(tp, dense(tp, params.get("text.W"), params.get("text.b"), withPos));
}

Tensor encode_image(Tape* tp, const ParamStore& params, const EncoderConfig& cfg,
                    const Tensor& grid) {
  if (grid.rows() != cfg.patches || grid.cols() != cfg.d_raw)
    throw std::invalid_argument("encode_image: grid " + grid.shape_str() + " does not match [" +
                                std::to_string(cfg.patches) + "," + std::to_string(cfg.d_raw) + "]");
  Tensor cols = transpose(tp, grid);  // [d_raw, |V|]
  return add(tp, matmul(tp, params.get("img.W"), cols), params.get("img.pos"));
}

Tensor extract_entity_rep(Tape* tp, const Tensor& text_features, const TokenSeq& seq) {
  auto column = [&](int pos) {
    if (pos < 1 || pos >= text_features.cols())
      throw std::invalid_argument("extract_entity_rep: missing marker position");
    return slice_cols(tp, text_features, pos, pos + 1);
  };
  // The column after each marker is the first entity token. The encoder has
  // no cross-token mixing, so the marker column itself would carry no entity
  // content; the token column does.
  Tensor cls = slice_cols(tp, text_features, seq.cls_pos, seq.cls_pos + 1);
  Tensor rep = concat_rows(tp, cls, column(seq.e1_pos + 1));
  if (seq.task == Task::MRE) rep = concat_rows(tp, rep, column(seq.e2_pos + 1));
  return rep;
}

Tensor PrototypeSet::matrix(Tape* tp) const {
  if (ids_.empty()) throw std::invalid_argument("PrototypeSet: empty");
  Tensor m = proto(0);
  for (int i = 1; i < count(); ++i) m = concat_cols(tp, m, proto(i));
  return m;
}

PrototypeSet encode_prototypes(Tape* tp, const ParamStore& params, const EncoderConfig& cfg,
                               const Vocabulary& vocab,
                               const std::vector<std::pair<int, std::vector<std::string>>>& names) {
  std::vector<int> ids;
  std::vector<Tensor> protos;
  for (const auto& [cat, name_tokens] : names) {
    if (name_tokens.empty())
      throw std::invalid_argument("encode_prototypes: empty category name");
    TokenSeq seq;
    seq.task = Task::MET;
    seq.ids.push_back(Vocabulary::kCls);
    for (const auto& w : name_tokens) {
      int id = vocab.id(w);
      if (id < 0) throw std::invalid_argument("encode_prototypes: unknown name token '" + w + "'");
      seq.ids.push_back(id);
    }
    seq.ids.push_back(Vocabulary::kSep);
    // Mean over all l+2 token features, [CLS]/[SEP] included.
    Tensor feats = encode_text(tp, params, cfg, seq);
    protos.push_back(row_mean(tp, feats));
    ids.push_back(cat);
  }
  return PrototypeSet(std::move(ids), std::move(protos));
}

}  // namespace mgv
