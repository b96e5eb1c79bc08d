#include "aspex/eval.hpp"

#include <set>
#include <stdexcept>

#include "aspex/common.hpp"

namespace aspex {

EvalReport make_report(std::size_t tp, std::size_t fp, std::size_t fn) {
  EvalReport r{tp, fp, fn, 0.0, 0.0, 0.0};
  const auto dtp = static_cast<double>(tp);
  if (tp + fp > 0) r.precision = dtp / static_cast<double>(tp + fp);
  if (tp + fn > 0) r.recall = dtp / static_cast<double>(tp + fn);
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

EvalReport exact_f1(const std::vector<std::vector<Chunk>>& gold,
                    const std::vector<std::vector<Chunk>>& pred) {
  if (gold.size() != pred.size()) {
    throw ValidationError("exact_f1: " + std::to_string(gold.size()) + " gold vs " +
                          std::to_string(pred.size()) + " predicted sentences");
  }
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    const std::set<Chunk> g(gold[s].begin(), gold[s].end());
    const std::set<Chunk> p(pred[s].begin(), pred[s].end());
    std::size_t hit = 0;
    for (const auto& c : p) hit += g.count(c);
    tp += hit;
    fp += p.size() - hit;
    fn += g.size() - hit;
  }
  return make_report(tp, fp, fn);
}

EvalReport exact_f1_tags(const std::vector<std::vector<IobTag>>& gold,
                         const std::vector<std::vector<IobTag>>& pred) {
  std::vector<std::vector<Chunk>> g;
  std::vector<std::vector<Chunk>> p;
  g.reserve(gold.size());
  p.reserve(pred.size());
  for (const auto& t : gold) g.push_back(decode_chunks(t));
  for (const auto& t : pred) p.push_back(decode_chunks(t));
  return exact_f1(g, p);
}

double improvement(double m1, double m2) {
  if (!(m1 < 100.0)) throw std::domain_error("improvement: baseline F1 must be below 100%");
  return 100.0 * (m2 - m1) / (100.0 - m1);
}

}  // namespace aspex
