#pragma once

#include <vector>

namespace mgv {

struct CategoryMetrics {
  int id = -1;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;  // gold occurrences
};

// Macro values are unweighted means over the categories present in the gold
// labels; predictions outside that set only count as false positives.
struct MetricsReport {
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<CategoryMetrics> per_category;
};

MetricsReport compute_metrics(const std::vector<int>& gold, const std::vector<int>& pred);

}  // namespace mgv
