#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "spinach/eval/cells.hpp"

namespace spinach::eval {

/// True/false positive and negative mass of one comparison, with F1 and EM.
struct EvalOutcome {
    double tp = 0;
    double fp = 0;
    double fn = 0;
    double f1 = 0;
    int em = 0;

    /// Builds an outcome from counts scaled by a common integer denominator so
    /// F1 is a single correctly-rounded division. tp = tp_scaled / scale, etc.
    /// When every count is zero the comparison is vacuous and F1 = EM = 1.
    static EvalOutcome from_scaled(std::int64_t tp_scaled, std::int64_t fp_scaled, std::int64_t fn_scaled,
                                   std::int64_t scale);

    bool operator==(const EvalOutcome&) const = default;
};

/// A flat answer list (single projection) or a boolean.
using ScalarAnswer = std::variant<std::vector<ResultCell>, bool>;

/// Set-based F1 over single-projection answers; booleans score 1 only when equal.
EvalOutcome scalar_f1(const ScalarAnswer& gold, const ScalarAnswer& pred);

/// |set(gold) ∩ set(pred)| / |set(gold)|; unbound cells are ignored. Extra
/// predicted columns cannot lower it.
double row_recall(std::span<const ResultCell> gold_row, std::span<const ResultCell> pred_row);

struct RowMatch {
    std::size_t gold_row;
    std::size_t pred_row;
    double recall;
    bool operator==(const RowMatch&) const = default;
};

/// One-to-one matching of gold rows to predicted rows maximizing the summed
/// row recall, never pairing rows with zero recall. Sorted by gold row.
std::vector<RowMatch> best_assignment(const ResultTable& gold, const ResultTable& pred);

/// Row-major EM/F1: each matched pair adds its recall to tp and the remainder
/// to fn, unmatched gold rows count 1 fn, unmatched predicted rows 1 fp.
EvalOutcome row_major_scores(const ResultTable& gold, const ResultTable& pred);

/// Arithmetic means of f1 and em.
struct MacroScores {
    double em = 0;
    double f1 = 0;
    std::size_t count = 0;
};
MacroScores macro_average(std::span<const EvalOutcome> outcomes);

} // namespace spinach::eval
