#include <doctest.h>

#include <algorithm>
#include <random>

#include "eval_oracle.hpp"
#include "spinach/eval/metrics.hpp"
#include "spinach/eval/normalize.hpp"

using namespace spinach;
using eval::ResultCell;
using eval::ResultTable;
using eval::Row;

namespace {

ResultCell E(const char* id) { return ResultCell::entity(id); }

ResultTable table(std::vector<Row> rows)
{
    std::size_t width = rows.empty() ? 1 : rows.front().size();
    std::vector<std::string> cols;
    for (std::size_t i = 0; i < width; ++i) {
        cols.push_back("c" + std::to_string(i));
    }
    return ResultTable::from_rows(cols, std::move(rows));
}

kb::SparqlTerm uri(std::string v) { return {kb::SparqlTerm::Type::uri, std::move(v), "", ""}; }
kb::SparqlTerm lit(std::string v, std::string dt = "", std::string lang = "")
{
    return {kb::SparqlTerm::Type::literal, std::move(v), std::move(dt), std::move(lang)};
}

const std::string xsd = "http://www.w3.org/2001/XMLSchema#";

} // namespace

TEST_CASE("two-column tables with one matching row")
{
    auto gold = table({{E("Q1"), E("Q2")}, {E("Q3"), E("Q4")}});
    auto pred = table({{E("Q1"), E("Q2")}, {E("Q5"), E("Q6")}});
    auto o = eval::row_major_scores(gold, pred);
    CHECK(o.tp == 1.0);
    CHECK(o.fp == 1.0);
    CHECK(o.fn == 1.0);
    CHECK(o.f1 == 0.5);
    CHECK(o.em == 0);
}

TEST_CASE("identical tables score exactly one")
{
    auto gold = table({{E("Q1"), E("Q2")}, {E("Q3"), E("Q4")}});
    auto o = eval::row_major_scores(gold, gold);
    CHECK(o.f1 == 1.0);
    CHECK(o.em == 1);
}

TEST_CASE("missing predicted column gives partial recall")
{
    auto o = eval::row_major_scores(table({{E("Q1"), E("Q2")}}), table({{E("Q1")}}));
    CHECK(o.tp == 0.5);
    CHECK(o.fn == 0.5);
    CHECK(o.fp == 0.0);
    CHECK(o.f1 == 2.0 / 3.0);
    CHECK(o.em == 0);
}

TEST_CASE("extra predicted column is not penalized")
{
    CHECK(eval::row_recall(Row{E("Q1")}, Row{E("Q1"), E("Q99")}) == 1.0);
    auto o = eval::row_major_scores(table({{E("Q1")}}), table({{E("Q1"), E("Q99")}}));
    CHECK(o.f1 == 1.0);
    CHECK(o.em == 1);
}

TEST_CASE("single column row-major equals scalar F1")
{
    auto o = eval::row_major_scores(table({{E("Q1")}, {E("Q2")}}), table({{E("Q1")}, {E("Q3")}}));
    auto s = eval::scalar_f1(std::vector<ResultCell>{E("Q1"), E("Q2")}, std::vector<ResultCell>{E("Q1"), E("Q3")});
    CHECK(o.f1 == 0.5);
    CHECK(s.f1 == 0.5);
}

TEST_CASE("assignment prefers the crossing pairs")
{
    auto gold = table({{E("Q1"), E("Q2")}, {E("Q3"), E("Q4")}});
    auto pred = table({{E("Q3"), E("Q4")}, {E("Q1"), E("Q2")}});
    auto m = eval::best_assignment(gold, pred);
    REQUIRE(m.size() == 2);
    CHECK(m[0] == eval::RowMatch{0, 1, 1.0});
    CHECK(m[1] == eval::RowMatch{1, 0, 1.0});
}

TEST_CASE("assignment never pairs zero-recall rows")
{
    auto m = eval::best_assignment(table({{E("Q1")}}), table({{E("Q26")}}));
    CHECK(m.empty());
    auto o = eval::row_major_scores(table({{E("Q1")}}), table({{E("Q26")}}));
    CHECK(o.fp == 1.0);
    CHECK(o.fn == 1.0);
    CHECK(o.f1 == 0.0);
}

TEST_CASE("assignment picks the gold row the prediction matches best")
{
    auto gold = table({{E("Q1"), E("Q2")}, {E("Q1"), E("Q3")}});
    auto pred = table({{E("Q1"), E("Q3")}});
    auto m = eval::best_assignment(gold, pred);
    REQUIRE(m.size() == 1);
    CHECK(m[0].gold_row == 1);
    CHECK(m[0].recall == 1.0);
}

TEST_CASE("equal-recall matchings prefer more matched pairs")
{
    auto gold = table({{E("Q1"), E("Q2")}, {E("Q3"), E("Q4")}});
    auto pred = ResultTable::from_rows({"a", "b", "c"}, {{E("Q1"), E("Q2"), E("Q3")}, {E("Q1"), E("Q1"), E("Q1")}});
    auto o = eval::row_major_scores(gold, pred);
    CHECK(o.tp == 1.0);
    CHECK(o.fp == 0.0);
    CHECK(o.f1 == 2.0 / 3.0);
    CHECK(o.f1 == oracle::f1(gold.rows, pred.rows));
}

TEST_CASE("scalar F1 over sets")
{
    auto o = eval::scalar_f1(std::vector<ResultCell>{E("Q1"), E("Q2")}, std::vector<ResultCell>{E("Q1"), E("Q3")});
    CHECK(o.f1 == 0.5);
    auto dup = eval::scalar_f1(std::vector<ResultCell>{E("Q1"), E("Q1")}, std::vector<ResultCell>{E("Q1")});
    CHECK(dup.em == 1);
}

TEST_CASE("boolean answers")
{
    CHECK(eval::scalar_f1(true, true).f1 == 1.0);
    CHECK(eval::scalar_f1(true, false).f1 == 0.0);
    CHECK(eval::row_major_scores(ResultTable::from_boolean(false), ResultTable::from_boolean(false)).em == 1);
    auto mixed = eval::row_major_scores(ResultTable::from_boolean(true), table({{E("Q1")}}));
    CHECK(mixed.f1 == 0.0);
    CHECK(mixed.em == 0);
}

TEST_CASE("empty tables")
{
    auto empty = table({});
    CHECK(eval::row_major_scores(empty, empty).f1 == 1.0);
    CHECK(eval::row_major_scores(table({{E("Q1")}}), empty).f1 == 0.0);
    CHECK(eval::row_major_scores(empty, table({{E("Q1")}})).f1 == 0.0);
}

TEST_CASE("unbound gold cells are ignored for recall")
{
    CHECK(eval::row_recall(Row{E("Q1"), ResultCell::unbound()}, Row{E("Q1")}) == 1.0);
}

TEST_CASE("normalize entity URIs and literals")
{
    CHECK(eval::normalize_term(uri("http://www.wikidata.org/entity/Q7604")) == E("Q7604"));
    CHECK(eval::normalize_term(lit("2021-06-23T00:00:00Z", xsd + "dateTime")) ==
          ResultCell::date(2021, 6, 23, eval::DatePrecision::day));
    CHECK(eval::normalize_term(lit("2021-06-23T00:00:00Z", xsd + "dateTime")).text() == "2021-06-23");
    CHECK(eval::normalize_term(lit("42", xsd + "integer")) == eval::normalize_term(lit("42.0", xsd + "decimal")));
    CHECK(eval::normalize_term(lit("Hello  World"), eval::NormalizeMode::label) == ResultCell::literal("hello world"));
    CHECK(eval::normalize_term(lit("Hello")) != eval::normalize_term(lit("hello")));
    CHECK_THROWS_AS(eval::normalize_term(uri("http://www.wikidata.org/entity/Qabc")), eval::UnresolvableBinding);
    CHECK(eval::normalize_term(uri("http://www.wikidata.org/entity/statement/Q1-abc")).kind() ==
          ResultCell::Kind::literal);
}

TEST_CASE("normalize whole responses")
{
    auto ask = eval::normalize_results(kb::SparqlResponse(true));
    CHECK(ask.is_boolean());
    CHECK(*ask.boolean);

    kb::SparqlTable t{{"x"}, {{uri("http://www.wikidata.org/entity/Q5")}, {uri("http://www.wikidata.org/entity/Q5")}}};
    auto norm = eval::normalize_results(kb::SparqlResponse(t));
    CHECK(norm.rows.size() == 1);

    auto labels = [](const std::vector<std::string>& ids) {
        std::map<std::string, std::string> out;
        for (const auto& id : ids) {
            out[id] = id == "Q5" ? "Human" : id;
        }
        return out;
    };
    auto by_label = eval::normalize_results(kb::SparqlResponse(t), eval::NormalizeMode::label, labels);
    CHECK(by_label.rows.at(0).at(0) == ResultCell::literal("human"));

    CHECK_THROWS_AS(eval::normalize_results(kb::SparqlResponse(kb::SparqlError{kb::SparqlErrorKind::syntax, "bad"})),
                    InvalidArgument);
}

TEST_CASE("row-major matches brute force on random small tables")
{
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        std::size_t cols_g = 1 + rng() % 3;
        std::size_t cols_p = 1 + rng() % 3;
        auto gold = oracle::random_table(rng, 5, cols_g, 5);
        auto pred = oracle::random_table(rng, 5, cols_p, 5);
        auto expected = oracle::f1(gold.rows, pred.rows);
        auto got = eval::row_major_scores(gold, pred);
        REQUIRE(got.f1 == expected);
        CHECK(got.em == (expected == 1.0 ? 1 : 0));
    }
}

TEST_CASE("scores are invariant under row and column permutations")
{
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        auto gold = oracle::random_table(rng, 6, 3, 6);
        auto pred = oracle::random_table(rng, 6, 2, 6);
        auto base = eval::row_major_scores(gold, pred).f1;
        auto g2 = gold;
        auto p2 = pred;
        std::shuffle(g2.rows.begin(), g2.rows.end(), rng);
        std::shuffle(p2.rows.begin(), p2.rows.end(), rng);
        for (auto& r : p2.rows) {
            std::reverse(r.begin(), r.end());
        }
        CHECK(eval::row_major_scores(g2, p2).f1 == base);
    }
}

TEST_CASE("adding a gold column to every predicted row never lowers F1")
{
    std::mt19937_64 rng(13);
    for (int i = 0; i < 300; ++i) {
        auto gold = oracle::random_table(rng, 5, 2, 5);
        auto pred = oracle::random_table(rng, 5, 1, 5);
        if (gold.rows.empty()) {
            continue;
        }
        auto before = eval::row_major_scores(gold, pred);
        auto wider = pred;
        wider.columns.push_back("extra");
        for (std::size_t r = 0; r < wider.rows.size(); ++r) {
            wider.rows[r].push_back(gold.rows[r % gold.rows.size()][1]);
        }
        CHECK(eval::row_major_scores(gold, eval::deduplicate_rows(wider)).tp >= before.tp);
        CHECK(eval::row_major_scores(gold, pred).f1 >= 0.0);
        CHECK(before.f1 <= 1.0);
    }
}

TEST_CASE("single projection row-major reduces to scalar F1")
{
    std::mt19937_64 rng(17);
    for (int i = 0; i < 500; ++i) {
        auto gold = oracle::random_table(rng, 6, 1, 6);
        auto pred = oracle::random_table(rng, 6, 1, 6);
        std::vector<ResultCell> g;
        std::vector<ResultCell> p;
        for (auto& r : gold.rows) g.push_back(r[0]);
        for (auto& r : pred.rows) p.push_back(r[0]);
        CHECK(eval::row_major_scores(gold, pred).f1 == eval::scalar_f1(g, p).f1);
    }
}

TEST_CASE("large tables stay fast and exact against themselves")
{
    std::vector<Row> rows;
    for (int i = 0; i < 2000; ++i) {
        rows.push_back({ResultCell::entity("Q" + std::to_string(i + 1)), ResultCell::number(i)});
    }
    auto t = table(rows);
    auto o = eval::row_major_scores(t, t);
    CHECK(o.em == 1);
}

TEST_CASE("macro average")
{
    std::vector<eval::EvalOutcome> v{eval::EvalOutcome::from_scaled(1, 0, 0, 1), eval::EvalOutcome::from_scaled(0, 1, 1, 1)};
    auto m = eval::macro_average(v);
    CHECK(m.f1 == 0.5);
    CHECK(m.em == 0.5);
    CHECK(m.count == 2);
}
