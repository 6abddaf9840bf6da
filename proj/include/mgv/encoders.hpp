#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mgv/ops.hpp"
#include "mgv/param_store.hpp"
#include "mgv/rng.hpp"

namespace mgv {

enum class Task { MET, MRE };

inline const char* task_name(Task t) { return t == Task::MET ? "met" : "mre"; }
Task task_from_name(const std::string& s);

// Token -> id map with reserved ids fixed at the head of the table.
class Vocabulary {
 public:
  static constexpr int kCls = 0, kSep = 1, kE1 = 2, kE1End = 3, kE2 = 4, kE2End = 5,
                       kPad = 6, kUnk = 7, kNumReserved = 8;
  static const std::vector<std::string>& reserved_tokens();

  Vocabulary();

  int add(const std::string& token);          // idempotent, returns id
  int id(const std::string& token) const;     // -1 when absent
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  void save(const std::string& path) const;   // one token per line, line number = id
  static Vocabulary load(const std::string& path);

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Extended sentence after marker insertion: [CLS] ... [E1] e [/E1] ... [SEP].
struct TokenSeq {
  std::vector<int> ids;
  int cls_pos = 0;
  int e1_pos = -1;  // position of [E1]
  int e2_pos = -1;  // position of [E2], MRE only
  Task task = Task::MET;
  int length() const { return static_cast<int>(ids.size()); }
};

struct EncoderConfig {
  int d = 32;        // feature dimension
  int d_raw = 16;    // raw patch feature dimension
  int patches = 8;   // |V|
  int max_len = 24;  // hard cap on |T|; truncation never removes markers
};

// Wraps the sentence with [CLS]/[SEP] and entity markers around each span.
// Spans index the raw sentence and must be non-overlapping; MET takes one
// span, MRE exactly two (head first).
TokenSeq tokenize_with_markers(const Vocabulary& vocab, const std::vector<std::string>& sentence,
                               const std::vector<std::pair<int, int>>& spans, Task task,
                               const EncoderConfig& cfg = {}, bool unk_fallback = true);

// Creates text.emb/text.W/text.b, img.W and img.pos.
void init_encoder_params(ParamStore& params, const EncoderConfig& cfg, int vocab_size, Rng& rng);

// Toy text encoder: embedding lookup + sinusoidal positions + one dense tanh
// layer. Column i is the contextual feature of token i; output is [d, |T|].
Tensor encode_text(Tape* tp, const ParamStore& params, const EncoderConfig& cfg,
                   const TokenSeq& seq);

// Toy vision encoder: linear projection of raw patch features plus learned
// per-patch position vectors. grid is [|V|, d_raw]; output is [d, |V|].
Tensor encode_image(Tape* tp, const ParamStore& params, const EncoderConfig& cfg,
                    const Tensor& grid);

// Concatenation of the [CLS] column and the first entity token column of
// each span (the column right after [E1], and after [E2] for MRE), giving
// [2d,1] for MET and [3d,1] for MRE.
Tensor extract_entity_rep(Tape* tp, const Tensor& text_features, const TokenSeq& seq);

// Mean-pooled encoding of category names; one prototype per category.
class PrototypeSet {
 public:
  PrototypeSet(std::vector<int> ids, std::vector<Tensor> protos)
      : ids_(std::move(ids)), protos_(std::move(protos)), accesses_(ids_.size(), 0) {}

  int count() const { return static_cast<int>(ids_.size()); }
  int category_id(int i) const { return ids_[i]; }
  const std::vector<int>& category_ids() const { return ids_; }

  const Tensor& proto(int i) const {
    ++accesses_[i];
    return protos_[i];
  }
  long accesses(int i) const { return accesses_[i]; }

  // [d, count] matrix of prototype columns (counts every prototype as read).
  Tensor matrix(Tape* tp) const;

 private:
  std::vector<int> ids_;
  std::vector<Tensor> protos_;
  mutable std::vector<long> accesses_;
};

PrototypeSet encode_prototypes(Tape* tp, const ParamStore& params, const EncoderConfig& cfg,
                               const Vocabulary& vocab,
                               const std::vector<std::pair<int, std::vector<std::string>>>& names);

}  // namespace mgv
