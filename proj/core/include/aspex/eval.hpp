#pragma once

#include <cstddef>
#include <vector>

#include "aspex/corpus.hpp"

namespace aspex {

struct EvalReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// P/R/F1 from counts; each ratio is 0 when its denominator is 0.
EvalReport make_report(std::size_t tp, std::size_t fp, std::size_t fn);

/// Micro-averaged exact-match chunk scoring. Chunks are compared as
/// token-index ranges per sentence. Throws ValidationError when the two
/// lists differ in length.
EvalReport exact_f1(const std::vector<std::vector<Chunk>>& gold,
                    const std::vector<std::vector<Chunk>>& pred);

/// Convenience over tag sequences (decoded with decode_chunks, so invalid
/// predicted IOB is repaired first).
EvalReport exact_f1_tags(const std::vector<std::vector<IobTag>>& gold,
                         const std::vector<std::vector<IobTag>>& pred);

/// Share of the headroom left by m1 that m2 recovers, in percent:
/// 100 * (m2 - m1) / (100 - m1). Inputs are F1 percentages. Throws
/// std::domain_error when m1 >= 100.
double improvement(double m1, double m2);

}  // namespace aspex
