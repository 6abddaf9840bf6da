#include "mgv/metrics.hpp"

#include <map>
#include <stdexcept>

namespace mgv {

MetricsReport compute_metrics(const std::vector<int>& gold, const std::vector<int>& pred) {
  if (gold.size() != pred.size())
    throw std::invalid_argument("compute_metrics: gold and prediction counts differ");
  if (gold.empty()) throw std::invalid_argument("compute_metrics: empty label list");

  struct Counts {
    long tp = 0, fp = 0, fn = 0, support = 0;
  };
  std::map<int, Counts> by_cat;
  long correct = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    ++by_cat[gold[i]].support;
    if (gold[i] == pred[i]) {
      ++by_cat[gold[i]].tp;
      ++correct;
    } else {
      ++by_cat[gold[i]].fn;
      ++by_cat[pred[i]].fp;
    }
  }

  MetricsReport report;
  report.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
  int present = 0;
  for (const auto& [id, c] : by_cat) {
    if (c.support == 0) continue;  // prediction-only category: false positives already counted
    CategoryMetrics m;
    m.id = id;
    m.support = static_cast<int>(c.support);
    m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / (c.tp + c.fp) : 0.0;
    m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / (c.tp + c.fn) : 0.0;
    m.f1 = m.precision + m.recall > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    report.macro_precision += m.precision;
    report.macro_recall += m.recall;
    report.macro_f1 += m.f1;
    ++present;
    report.per_category.push_back(m);
  }
  report.macro_precision /= present;
  report.macro_recall /= present;
  report.macro_f1 /= present;
  return report;
}

}  // namespace mgv
