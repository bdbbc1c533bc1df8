#include "spinach/eval/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "spinach/eval/assignment.hpp"

namespace spinach::eval {

namespace {

using KeySet = std::vector<std::string>;

KeySet key_set(std::span<const ResultCell> row)
{
    KeySet keys;
    keys.reserve(row.size());
    for (const auto& cell : row) {
        if (cell.kind() != ResultCell::Kind::unbound) {
            keys.push_back(cell.key());
        }
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

std::size_t overlap(const KeySet& a, const KeySet& b)
{
    std::size_t n = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++n;
            ++ia;
            ++ib;
        }
    }
    return n;
}

/// Common denominator for all gold row recalls: lcm of the gold set sizes,
/// bounded so that summed tie-broken weights cannot overflow.
std::int64_t recall_scale(const std::vector<KeySet>& gold_sets, std::int64_t tie_factor)
{
    const auto rows = static_cast<std::int64_t>(std::max<std::size_t>(gold_sets.size(), 1));
    const auto limit = (std::int64_t{1} << 62) / (rows * tie_factor * 2);
    std::int64_t scale = 1;
    for (const auto& s : gold_sets) {
        if (s.empty()) {
            continue;
        }
        auto next = std::lcm(scale, static_cast<std::int64_t>(s.size()));
        if (next > limit) {
            // Fallback for pathological widths: exact for every size dividing 720720.
            return 720720;
        }
        scale = next;
    }
    return scale;
}

struct ScaledMatch {
    std::vector<RowMatch> pairs;
    std::int64_t total = 0; // summed recall × scale
    std::int64_t scale = 1;
};

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

ScaledMatch solve(const ResultTable& gold, const ResultTable& pred)
{
    ScaledMatch out;
    const auto n = gold.rows.size();
    const auto m = pred.rows.size();
    std::vector<KeySet> gold_sets;
    gold_sets.reserve(n);
    for (const auto& row : gold.rows) {
        gold_sets.push_back(key_set(row));
    }
    // Ties in total recall go to the matching with more pairs (fewer false
    // positives): weight = recall × scale × tie_factor + 1 per matched pair.
    const auto tie_factor = static_cast<std::int64_t>(std::min(n, m)) + 1;
    out.scale = recall_scale(gold_sets, tie_factor);
    if (n == 0 || m == 0) {
        return out;
    }

    std::unordered_map<std::string, std::vector<std::size_t>> index;
    for (std::size_t g = 0; g < n; ++g) {
        for (const auto& key : gold_sets[g]) {
            index[key].push_back(g);
        }
    }

    struct Edge {
        std::size_t gold;
        std::size_t pred;
        std::int64_t weight;
    };
    std::vector<Edge> edges;
    DisjointSets components(n + m);
    std::unordered_map<std::size_t, std::size_t> shared;
    for (std::size_t p = 0; p < m; ++p) {
        shared.clear();
        for (const auto& key : key_set(pred.rows[p])) {
            if (auto it = index.find(key); it != index.end()) {
                for (auto g : it->second) {
                    ++shared[g];
                }
            }
        }
        for (auto [g, count] : shared) {
            auto size = static_cast<std::int64_t>(gold_sets[g].size());
            // Exact when size divides scale; the rounding only applies to the fallback scale.
            auto weight = (static_cast<std::int64_t>(count) * out.scale + size / 2) / size;
            edges.push_back({g, p, weight});
            components.unite(g, n + p);
        }
    }

    // Solve each connected component of the positive-recall graph on its own.
    std::unordered_map<std::size_t, std::vector<std::size_t>> edges_by_component;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        edges_by_component[components.find(edges[e].gold)].push_back(e);
    }
    for (const auto& [root, edge_ids] : edges_by_component) {
        std::vector<std::size_t> golds;
        std::vector<std::size_t> preds;
        for (auto e : edge_ids) {
            golds.push_back(edges[e].gold);
            preds.push_back(edges[e].pred);
        }
        std::sort(golds.begin(), golds.end());
        golds.erase(std::unique(golds.begin(), golds.end()), golds.end());
        std::sort(preds.begin(), preds.end());
        preds.erase(std::unique(preds.begin(), preds.end()), preds.end());

        auto local = [](const std::vector<std::size_t>& v, std::size_t x) {
            return static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
        };
        std::vector<std::vector<std::int64_t>> weights(golds.size(), std::vector<std::int64_t>(preds.size(), 0));
        for (auto e : edge_ids) {
            weights[local(golds, edges[e].gold)][local(preds, edges[e].pred)] = edges[e].weight * tie_factor + 1;
        }
        auto assignment = max_weight_assignment(weights);
        for (std::size_t i = 0; i < golds.size(); ++i) {
            if (assignment[i] < 0) {
                continue;
            }
            auto w = weights[i][static_cast<std::size_t>(assignment[i])] / tie_factor;
            if (w <= 0) {
                continue;
            }
            out.total += w;
            out.pairs.push_back(RowMatch{golds[i], preds[static_cast<std::size_t>(assignment[i])],
                                         static_cast<double>(w) / static_cast<double>(out.scale)});
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end(),
              [](const RowMatch& a, const RowMatch& b) { return a.gold_row < b.gold_row; });
    return out;
}

} // namespace

EvalOutcome EvalOutcome::from_scaled(std::int64_t tp_scaled, std::int64_t fp_scaled, std::int64_t fn_scaled,
                                     std::int64_t scale)
{
    EvalOutcome o;
    const auto s = static_cast<double>(scale);
    o.tp = static_cast<double>(tp_scaled) / s;
    o.fp = static_cast<double>(fp_scaled) / s;
    o.fn = static_cast<double>(fn_scaled) / s;
    const auto denominator = 2 * tp_scaled + fp_scaled + fn_scaled;
    if (denominator == 0) {
        o.f1 = 1.0;
    } else {
        o.f1 = static_cast<double>(2 * tp_scaled) / static_cast<double>(denominator);
    }
    o.em = (fp_scaled == 0 && fn_scaled == 0) ? 1 : 0;
    return o;
}

EvalOutcome scalar_f1(const ScalarAnswer& gold, const ScalarAnswer& pred)
{
    if (std::holds_alternative<bool>(gold) || std::holds_alternative<bool>(pred)) {
        bool equal = gold.index() == pred.index() && std::get<bool>(gold) == std::get<bool>(pred);
        return equal ? EvalOutcome::from_scaled(1, 0, 0, 1) : EvalOutcome::from_scaled(0, 1, 1, 1);
    }
    auto g = key_set(std::get<std::vector<ResultCell>>(gold));
    auto p = key_set(std::get<std::vector<ResultCell>>(pred));
    auto tp = static_cast<std::int64_t>(overlap(g, p));
    return EvalOutcome::from_scaled(tp, static_cast<std::int64_t>(p.size()) - tp,
                                    static_cast<std::int64_t>(g.size()) - tp, 1);
}

double row_recall(std::span<const ResultCell> gold_row, std::span<const ResultCell> pred_row)
{
    auto g = key_set(gold_row);
    if (g.empty()) {
        return 0.0;
    }
    return static_cast<double>(overlap(g, key_set(pred_row))) / static_cast<double>(g.size());
}

std::vector<RowMatch> best_assignment(const ResultTable& gold, const ResultTable& pred)
{
    return solve(gold, pred).pairs;
}

EvalOutcome row_major_scores(const ResultTable& gold, const ResultTable& pred)
{
    if (gold.is_boolean() || pred.is_boolean()) {
        if (gold.is_boolean() && pred.is_boolean()) {
            return scalar_f1(*gold.boolean, *pred.boolean);
        }
        auto fn = gold.is_boolean() ? 1 : static_cast<std::int64_t>(gold.rows.size());
        auto fp = pred.is_boolean() ? 1 : static_cast<std::int64_t>(pred.rows.size());
        return EvalOutcome::from_scaled(0, fp, fn, 1);
    }
    auto match = solve(gold, pred);
    const auto scale = match.scale;
    const auto matched = static_cast<std::int64_t>(match.pairs.size());
    const auto n = static_cast<std::int64_t>(gold.rows.size());
    const auto m = static_cast<std::int64_t>(pred.rows.size());
    const auto fn_scaled = (matched * scale - match.total) + (n - matched) * scale;
    return EvalOutcome::from_scaled(match.total, (m - matched) * scale, fn_scaled, scale);
}

MacroScores macro_average(std::span<const EvalOutcome> outcomes)
{
    MacroScores s;
    s.count = outcomes.size();
    if (outcomes.empty()) {
        return s;
    }
    for (const auto& o : outcomes) {
        s.em += o.em;
        s.f1 += o.f1;
    }
    s.em /= static_cast<double>(outcomes.size());
    s.f1 /= static_cast<double>(outcomes.size());
    return s;
}

} // namespace spinach::eval
