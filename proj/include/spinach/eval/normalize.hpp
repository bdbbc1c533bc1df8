#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "spinach/eval/cells.hpp"
#include "spinach/kb/types.hpp"

namespace spinach::eval {

enum class NormalizeMode { id, label };

class UnresolvableBinding : public Error {
public:
    using Error::Error;
};

/// Maps entity ids to English labels (label mode only).
using LabelResolver = std::function<std::map<std::string, std::string>(const std::vector<std::string>&)>;

/// Converts endpoint bindings into comparable cells and removes duplicate rows.
///
/// Entity URIs become Entity cells in id mode and case-folded label Literals
/// in label mode; typed literals become Number, Date or Boolean cells.
/// Throws InvalidArgument for error responses and UnresolvableBinding for
/// malformed Wikidata entity URIs.
ResultTable normalize_results(const kb::SparqlResponse& raw, NormalizeMode mode = NormalizeMode::id,
                              const LabelResolver& labels = {});

/// Converts a single binding (exposed for tests).
ResultCell normalize_term(const kb::SparqlTerm& term, NormalizeMode mode = NormalizeMode::id);

} // namespace spinach::eval
