#include "spinach/stats/query_stats.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <set>

#include "spinach/common/text.hpp"

namespace spinach::stats {

namespace {

enum class Tok { iri, pname, var, string, number, word, punct, end };

struct Token {
    Tok type;
    std::string text;
    std::size_t offset;
};

bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : s_(src) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            if (i_ >= s_.size()) {
                out.push_back({Tok::end, "", i_});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    char peek(std::size_t k = 0) const { return i_ + k < s_.size() ? s_[i_ + k] : '\0'; }

    void skip_space()
    {
        while (i_ < s_.size()) {
            if (std::isspace(static_cast<unsigned char>(s_[i_]))) {
                ++i_;
            } else if (s_[i_] == '#') {
                while (i_ < s_.size() && s_[i_] != '\n') {
                    ++i_;
                }
            } else {
                break;
            }
        }
    }

    Token next()
    {
        const auto start = i_;
        const char c = peek();
        if (c == '<') {
            auto j = i_ + 1;
            while (j < s_.size() && std::string_view("<>\"{}|^`\\ \t\r\n").find(s_[j]) == std::string_view::npos) {
                ++j;
            }
            if (j < s_.size() && s_[j] == '>') {
                i_ = j + 1;
                return {Tok::iri, std::string(s_.substr(start + 1, j - start - 1)), start};
            }
        }
        if ((c == '?' || c == '$') && name_char(peek(1))) {
            ++i_;
            while (name_char(peek()) && peek() != '-') {
                ++i_;
            }
            return {Tok::var, std::string(s_.substr(start + 1, i_ - start - 1)), start};
        }
        if (c == '"' || c == '\'') {
            return string_token();
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (std::isdigit(static_cast<unsigned char>(peek()))) {
                ++i_;
            }
            if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1)))) {
                ++i_;
                while (std::isdigit(static_cast<unsigned char>(peek()))) {
                    ++i_;
                }
            }
            if ((peek() == 'e' || peek() == 'E') &&
                (std::isdigit(static_cast<unsigned char>(peek(1))) ||
                 ((peek(1) == '+' || peek(1) == '-') && std::isdigit(static_cast<unsigned char>(peek(2)))))) {
                i_ += 2;
                while (std::isdigit(static_cast<unsigned char>(peek()))) {
                    ++i_;
                }
            }
            return {Tok::number, std::string(s_.substr(start, i_ - start)), start};
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':') {
            while (name_char(peek())) {
                ++i_;
            }
            if (peek() != ':') {
                return {Tok::word, std::string(s_.substr(start, i_ - start)), start};
            }
            ++i_;
            while (name_char(peek()) || peek() == '.' || peek() == ':' || peek() == '%') {
                ++i_;
            }
            while (s_[i_ - 1] == '.') {
                --i_;
            }
            return {Tok::pname, std::string(s_.substr(start, i_ - start)), start};
        }
        for (std::string_view two : {"&&", "||", "!=", "<=", ">=", "^^"}) {
            if (s_.substr(i_, 2) == two) {
                i_ += 2;
                return {Tok::punct, std::string(two), start};
            }
        }
        if (std::string_view("{}()[].,;/|^*+?!=<>-").find(c) != std::string_view::npos) {
            ++i_;
            return {Tok::punct, std::string(1, c), start};
        }
        throw UnsupportedSyntax(std::string("unexpected character '") + c + "'", start);
    }

    Token string_token()
    {
        const auto start = i_;
        const char q = peek();
        const bool triple = peek(1) == q && peek(2) == q;
        i_ += triple ? 3 : 1;
        std::string body;
        for (;;) {
            if (i_ >= s_.size()) {
                throw UnsupportedSyntax("unterminated string", start);
            }
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
                body += s_.substr(i_, 2);
                i_ += 2;
                continue;
            }
            if (triple ? s_.substr(i_, 3) == std::string(3, q) : s_[i_] == q) {
                i_ += triple ? 3 : 1;
                break;
            }
            if (!triple && s_[i_] == '\n') {
                throw UnsupportedSyntax("newline in string", start);
            }
            body += s_[i_++];
        }
        std::string text = "\"" + body + "\"";
        if (peek() == '@') {
            auto j = i_ + 1;
            while (j < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[j])) || s_[j] == '-')) {
                ++j;
            }
            text += s_.substr(i_, j - i_);
            i_ = j;
        } else if (s_.substr(i_, 2) == "^^") {
            i_ += 2;
            auto dt = next();
            if (dt.type != Tok::iri && dt.type != Tok::pname) {
                throw UnsupportedSyntax("bad datatype", dt.offset);
            }
            text += "^^" + dt.text;
        }
        return {Tok::string, text, start};
    }

    std::string_view s_;
    std::size_t i_ = 0;
};

const std::map<std::string, std::string>& default_prefixes()
{
    static const std::map<std::string, std::string> m{
        {"wd", "http://www.wikidata.org/entity/"},
        {"wdt", "http://www.wikidata.org/prop/direct/"},
        {"wdtn", "http://www.wikidata.org/prop/direct-normalized/"},
        {"wds", "http://www.wikidata.org/entity/statement/"},
        {"p", "http://www.wikidata.org/prop/"},
        {"ps", "http://www.wikidata.org/prop/statement/"},
        {"psv", "http://www.wikidata.org/prop/statement/value/"},
        {"psn", "http://www.wikidata.org/prop/statement/value-normalized/"},
        {"pq", "http://www.wikidata.org/prop/qualifier/"},
        {"pqv", "http://www.wikidata.org/prop/qualifier/value/"},
        {"pqn", "http://www.wikidata.org/prop/qualifier/value-normalized/"},
        {"pr", "http://www.wikidata.org/prop/reference/"},
        {"prv", "http://www.wikidata.org/prop/reference/value/"},
        {"wdno", "http://www.wikidata.org/prop/novalue/"},
        {"wikibase", "http://wikiba.se/ontology#"},
        {"bd", "http://www.bigdata.com/rdf#"},
        {"rdf", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"},
        {"rdfs", "http://www.w3.org/2000/01/rdf-schema#"},
        {"xsd", "http://www.w3.org/2001/XMLSchema#"},
        {"owl", "http://www.w3.org/2002/07/owl#"},
        {"skos", "http://www.w3.org/2004/02/skos/core#"},
        {"schema", "http://schema.org/"},
    };
    return m;
}

constexpr std::string_view label_service = "http://wikiba.se/ontology#label";

class Analyzer {
public:
    explicit Analyzer(std::string_view query) : tokens_(Lexer(query).run()), prefixes_(default_prefixes()) {}

    QueryStats run()
    {
        while (is_word("PREFIX") || is_word("BASE")) {
            if (take_word("BASE")) {
                expect(Tok::iri);
                continue;
            }
            take_word("PREFIX");
            auto ns = expect(Tok::pname);
            if (ns.text.back() != ':') {
                fail("expected prefix name");
            }
            auto iri = expect(Tok::iri);
            prefixes_[ns.text.substr(0, ns.text.size() - 1)] = iri.text;
        }
        if (is_word("SELECT")) {
            select(true);
        } else if (take_word("ASK")) {
            ++stats_.clauses;
            dataset_clauses();
            take_word("WHERE");
            group();
            modifiers();
        } else {
            fail("only SELECT and ASK queries are analyzed");
        }
        if (take_word("VALUES")) {
            values();
        }
        if (cur().type != Tok::end) {
            fail("trailing input");
        }
        stats_.subjects = static_cast<int>(subjects_.size());
        stats_.objects = static_cast<int>(objects_.size());
        stats_.predicates = static_cast<int>(predicates_.size());
        stats_.literals = static_cast<int>(literals_.size());
        return stats_;
    }

private:
    const Token& cur() const { return tokens_[pos_]; }
    const Token& ahead(std::size_t k) const { return tokens_[std::min(pos_ + k, tokens_.size() - 1)]; }

    [[noreturn]] void fail(const std::string& what) const
    {
        throw UnsupportedSyntax(what + (cur().type == Tok::end ? " (end of query)" : " near '" + cur().text + "'"),
                                cur().offset);
    }

    bool is_word(std::string_view w, std::size_t k = 0) const
    {
        const auto& t = ahead(k);
        return t.type == Tok::word && text::to_lower(t.text) == text::to_lower(std::string(w));
    }
    bool is_punct(std::string_view p, std::size_t k = 0) const
    {
        const auto& t = ahead(k);
        return t.type == Tok::punct && t.text == p;
    }
    bool take_word(std::string_view w)
    {
        if (!is_word(w)) {
            return false;
        }
        ++pos_;
        return true;
    }
    bool take_punct(std::string_view p)
    {
        if (!is_punct(p)) {
            return false;
        }
        ++pos_;
        return true;
    }
    Token expect(Tok type)
    {
        if (cur().type != type) {
            fail("unexpected token");
        }
        return tokens_[pos_++];
    }
    void expect_punct(std::string_view p)
    {
        if (!take_punct(p)) {
            fail("expected '" + std::string(p) + "'");
        }
    }

    void count(int& field)
    {
        if (muted_ == 0) {
            ++field;
        }
    }
    void note(std::set<std::string>& set, std::string key)
    {
        if (muted_ == 0) {
            set.insert(std::move(key));
        }
    }

    std::string expand(const Token& t) const
    {
        if (t.type == Tok::iri) {
            return t.text;
        }
        auto colon = t.text.find(':');
        if (auto it = prefixes_.find(t.text.substr(0, colon)); it != prefixes_.end()) {
            return it->second + t.text.substr(colon + 1);
        }
        return t.text;
    }

    /// Set key for a term; literal keys are tagged by kind.
    std::string term_key(const Token& t) const
    {
        switch (t.type) {
        case Tok::var:
            return "?" + t.text;
        case Tok::iri:
        case Tok::pname:
            return "<" + expand(t) + ">";
        case Tok::number:
            return "#" + t.text;
        default:
            return t.text;
        }
    }

    void literal(const Token& t)
    {
        if (t.type == Tok::string || t.type == Tok::number) {
            note(literals_, term_key(t));
        }
    }

    void predicate_iri(const Token& t)
    {
        static const std::regex pid(R"(^http://www\.wikidata\.org/.*/(P[1-9][0-9]*)$)");
        std::smatch m;
        auto iri = expand(t);
        if (std::regex_match(iri, m, pid)) {
            note(predicates_, m[1]);
        }
    }

    void select(bool outermost)
    {
        take_word("SELECT");
        count(stats_.clauses);
        if (!take_word("DISTINCT")) {
            take_word("REDUCED");
        }
        int fields = 0;
        bool star = false;
        if (take_punct("*")) {
            star = true;
        } else {
            while (cur().type == Tok::var || is_punct("(")) {
                if (cur().type == Tok::var) {
                    ++pos_;
                } else {
                    bracketed();
                }
                ++fields;
            }
            if (fields == 0) {
                fail("empty projection");
            }
        }
        dataset_clauses();
        take_word("WHERE");
        const auto vars_before = variables_.size();
        group();
        if (outermost) {
            stats_.projections = star ? static_cast<int>(variables_.size() - vars_before) : fields;
        }
        modifiers();
    }

    void dataset_clauses()
    {
        while (take_word("FROM")) {
            take_word("NAMED");
            if (cur().type != Tok::iri && cur().type != Tok::pname) {
                fail("expected graph IRI");
            }
            ++pos_;
        }
    }

    bool at_modifier_end() const
    {
        return cur().type == Tok::end || is_punct("}") || is_word("GROUP") || is_word("HAVING") ||
               is_word("ORDER") || is_word("LIMIT") || is_word("OFFSET") || is_word("VALUES");
    }

    void modifiers()
    {
        if (take_word("GROUP")) {
            if (!take_word("BY")) {
                fail("expected BY");
            }
            count(stats_.clauses);
            conditions();
        }
        if (take_word("HAVING")) {
            count(stats_.clauses);
            conditions();
        }
        if (take_word("ORDER")) {
            if (!take_word("BY")) {
                fail("expected BY");
            }
            count(stats_.clauses);
            conditions();
        }
        for (;;) {
            if (take_word("LIMIT") || take_word("OFFSET")) {
                expect(Tok::number);
            } else {
                break;
            }
        }
    }

    void conditions()
    {
        bool any = false;
        while (!at_modifier_end()) {
            if (cur().type == Tok::var) {
                ++pos_;
            } else if (is_punct("(")) {
                bracketed();
            } else if (cur().type == Tok::word || cur().type == Tok::pname) {
                ++pos_;
                bracketed();
            } else {
                fail("bad condition");
            }
            any = true;
        }
        if (!any) {
            fail("empty condition list");
        }
    }

    /// A parenthesized expression; records literals and descends into EXISTS.
    void bracketed()
    {
        expect_punct("(");
        int depth = 1;
        while (depth > 0) {
            const auto& t = cur();
            if (t.type == Tok::end) {
                fail("unbalanced parentheses");
            }
            if (is_word("EXISTS") && is_punct("{", 1)) {
                ++pos_;
                group();
                continue;
            }
            if (is_punct("{") || is_punct("}")) {
                fail("unexpected brace in expression");
            }
            if (t.type == Tok::punct && t.text == "(") {
                ++depth;
            } else if (t.type == Tok::punct && t.text == ")") {
                --depth;
            } else if (t.type == Tok::var) {
                variables_.insert(t.text);
            }
            literal(t);
            ++pos_;
        }
    }

    void constraint()
    {
        if (is_punct("(")) {
            bracketed();
        } else if (take_word("NOT")) {
            if (!take_word("EXISTS")) {
                fail("expected EXISTS");
            }
            group();
        } else if (take_word("EXISTS")) {
            group();
        } else if ((cur().type == Tok::word || cur().type == Tok::pname) && is_punct("(", 1)) {
            ++pos_;
            bracketed();
        } else {
            fail("bad FILTER");
        }
    }

    void group()
    {
        expect_punct("{");
        if (is_word("SELECT")) {
            select(false);
            if (take_word("VALUES")) {
                values();
            }
            expect_punct("}");
            return;
        }
        while (!take_punct("}")) {
            if (cur().type == Tok::end) {
                fail("unterminated group");
            }
            if (take_word("OPTIONAL") || take_word("MINUS")) {
                count(stats_.clauses);
                group();
            } else if (take_word("GRAPH")) {
                ++pos_;
                group();
            } else if (take_word("SERVICE")) {
                take_word("SILENT");
                if (cur().type != Tok::iri && cur().type != Tok::pname && cur().type != Tok::var) {
                    fail("expected service IRI");
                }
                // The label service only decorates results; its bd:serviceParam triples are not query structure.
                const bool labels = cur().type != Tok::var && expand(cur()) == label_service;
                ++pos_;
                muted_ += labels ? 1 : 0;
                group();
                muted_ -= labels ? 1 : 0;
            } else if (take_word("FILTER")) {
                count(stats_.clauses);
                constraint();
            } else if (take_word("BIND")) {
                count(stats_.clauses);
                bracketed();
            } else if (take_word("VALUES")) {
                values();
            } else if (is_punct("{")) {
                group();
                while (take_word("UNION")) {
                    count(stats_.clauses);
                    group();
                }
            } else if (take_punct(".")) {
                continue;
            } else {
                triples();
            }
        }
    }

    /// Folds a leading sign into the following number token.
    void signed_number()
    {
        if ((is_punct("-") || is_punct("+")) && ahead(1).type == Tok::number) {
            ++pos_;
            tokens_[pos_].text = (tokens_[pos_ - 1].text == "-" ? "-" : "") + tokens_[pos_].text;
        }
    }

    void value_entry()
    {
        signed_number();
        const auto& t = cur();
        if (is_word("UNDEF")) {
            ++pos_;
            return;
        }
        if (t.type == Tok::iri || t.type == Tok::pname || t.type == Tok::string || t.type == Tok::number ||
            is_word("true") || is_word("false")) {
            note(objects_, term_key(t));
            literal(t);
            ++pos_;
            return;
        }
        fail("bad VALUES entry");
    }

    void values()
    {
        if (cur().type == Tok::var) {
            variables_.insert(cur().text);
            ++pos_;
            expect_punct("{");
            while (!take_punct("}")) {
                value_entry();
            }
            return;
        }
        expect_punct("(");
        while (cur().type == Tok::var) {
            variables_.insert(cur().text);
            ++pos_;
        }
        expect_punct(")");
        expect_punct("{");
        while (!take_punct("}")) {
            expect_punct("(");
            while (!take_punct(")")) {
                value_entry();
            }
        }
    }

    void triples()
    {
        if (take_punct("[")) {
            if (!take_punct("]")) {
                property_list(std::nullopt);
                expect_punct("]");
                if (!starts_verb()) {
                    return;
                }
            }
            property_list(std::nullopt);
            return;
        }
        const auto& t = cur();
        if (t.type != Tok::var && t.type != Tok::iri && t.type != Tok::pname) {
            fail("expected triple subject");
        }
        if (t.type == Tok::var) {
            variables_.insert(t.text);
        }
        auto subject = term_key(t);
        ++pos_;
        property_list(subject);
    }

    bool starts_verb() const
    {
        const auto& t = cur();
        return t.type == Tok::var || t.type == Tok::iri || t.type == Tok::pname || is_word("a") || is_punct("^") ||
               is_punct("!") || is_punct("(");
    }

    void property_list(const std::optional<std::string>& subject)
    {
        for (;;) {
            verb();
            for (;;) {
                object();
                count(stats_.clauses);
                count(stats_.relations);
                if (subject) {
                    note(subjects_, *subject);
                }
                if (!take_punct(",")) {
                    break;
                }
            }
            if (!take_punct(";")) {
                return;
            }
            while (take_punct(";")) {
            }
            if (!starts_verb()) {
                return;
            }
        }
    }

    void verb()
    {
        if (cur().type == Tok::var) {
            variables_.insert(cur().text);
            ++pos_;
            return;
        }
        path_alternative();
    }

    void path_alternative()
    {
        path_sequence();
        while (take_punct("|")) {
            path_sequence();
        }
    }

    void path_sequence()
    {
        path_element();
        while (take_punct("/")) {
            path_element();
        }
    }

    void path_element()
    {
        take_punct("^");
        if (take_punct("(")) {
            path_alternative();
            expect_punct(")");
        } else if (take_punct("!")) {
            if (take_punct("(")) {
                while (!take_punct(")")) {
                    if (!take_punct("|")) {
                        negated_one();
                    }
                }
            } else {
                negated_one();
            }
        } else if (take_word("a")) {
        } else if (cur().type == Tok::iri || cur().type == Tok::pname) {
            predicate_iri(cur());
            ++pos_;
        } else {
            fail("expected predicate");
        }
        if (!take_punct("?") && !take_punct("*")) {
            take_punct("+");
        }
    }

    void negated_one()
    {
        take_punct("^");
        if (take_word("a")) {
            return;
        }
        if (cur().type != Tok::iri && cur().type != Tok::pname) {
            fail("expected IRI in negated path");
        }
        predicate_iri(cur());
        ++pos_;
    }

    void object()
    {
        if (take_punct("[")) {
            if (!take_punct("]")) {
                property_list(std::nullopt);
                expect_punct("]");
            }
            return;
        }
        signed_number();
        const auto& t = cur();
        switch (t.type) {
        case Tok::var:
            variables_.insert(t.text);
            [[fallthrough]];
        case Tok::iri:
        case Tok::pname:
            note(objects_, term_key(t));
            break;
        case Tok::string:
        case Tok::number:
            literal(t);
            break;
        default:
            if (!is_word("true") && !is_word("false")) {
                fail("expected triple object");
            }
        }
        ++pos_;
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::map<std::string, std::string> prefixes_;
    QueryStats stats_;
    std::set<std::string> subjects_;
    std::set<std::string> objects_;
    std::set<std::string> predicates_;
    std::set<std::string> literals_;
    std::set<std::string> variables_;
    int muted_ = 0;
};

} // namespace

QueryStats analyze_query(std::string_view query) { return Analyzer(query).run(); }

AggregateStats aggregate_stats(const std::vector<std::string>& queries)
{
    if (queries.empty()) {
        throw InvalidArgument("aggregate_stats needs at least one query");
    }
    AggregateStats out;
    std::array<long long, 7> sums{};
    for (std::size_t i = 0; i < queries.size(); ++i) {
        try {
            auto s = analyze_query(queries[i]);
            const std::array<int, 7> v{s.clauses,    s.projections, s.relations, s.subjects,
                                       s.predicates, s.objects,     s.literals};
            for (std::size_t k = 0; k < v.size(); ++k) {
                sums[k] += v[k];
            }
            ++out.analyzed;
        } catch (const UnsupportedSyntax& e) {
            out.excluded.push_back({i, e.what()});
        }
    }
    if (out.analyzed > 0) {
        for (std::size_t k = 0; k < sums.size(); ++k) {
            out.means[k] = static_cast<double>(sums[k]) / static_cast<double>(out.analyzed);
        }
    }
    return out;
}

} // namespace spinach::stats
