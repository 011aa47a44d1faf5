#include <cmath>
#include <fstream>
#include <sstream>

#include "lexer.hpp"
#include "stochrob/formula.hpp"

namespace stochrob {

bool compare(double lhs, Cmp op, double rhs) {
    switch (op) {
        case Cmp::Less: return lhs < rhs;
        case Cmp::LessEq: return lhs <= rhs;
        case Cmp::Greater: return lhs > rhs;
        case Cmp::GreaterEq: return lhs >= rhs;
        case Cmp::Equal: return lhs == rhs;
        case Cmp::NotEqual: return lhs != rhs;
    }
    return false;
}

std::string to_string(Cmp op) {
    switch (op) {
        case Cmp::Less: return "<";
        case Cmp::LessEq: return "<=";
        case Cmp::Greater: return ">";
        case Cmp::GreaterEq: return ">=";
        case Cmp::Equal: return "=";
        case Cmp::NotEqual: return "!=";
    }
    return "?";
}

bool Predicate::holds(std::span<const int> state) const {
    double v = offset;
    for (std::size_t i = 0; i < coeffs.size(); ++i) v += coeffs[i] * state[i];
    return compare(v, op, 0.0);
}

std::vector<char> label(const StateSpace& space, const Predicate& p) {
    std::vector<char> out(space.size());
    for (int i = 0; i < space.size(); ++i) out[i] = p.holds(space.state(i));
    return out;
}

Eigen::VectorXd RewardStructure::rates(const StateSpace& space) const {
    Eigen::VectorXd rho = Eigen::VectorXd::Zero(space.size());
    for (int i = 0; i < space.size(); ++i)
        for (const auto& item : items)
            if (item.applies(space.state(i))) rho[i] += item.value;
    return rho;
}

bool RewardItem::applies(std::span<const int> state) const {
    for (const auto& p : when)
        if (!p.holds(state)) return false;
    return true;
}

const RewardStructure* PropertySet::reward(std::string_view name) const {
    for (const auto& r : rewards)
        if (r.name == name) return &r;
    return nullptr;
}

const PostFunction* PropertySet::post(std::string_view name) const {
    for (const auto& p : posts)
        if (p.name == name) return &p;
    return nullptr;
}

namespace {

std::optional<Cmp> cmp_token(const Token& t) {
    if (t.kind != Token::Punct) return std::nullopt;
    if (t.text == "<") return Cmp::Less;
    if (t.text == "<=") return Cmp::LessEq;
    if (t.text == ">") return Cmp::Greater;
    if (t.text == ">=") return Cmp::GreaterEq;
    if (t.text == "=" || t.text == "==") return Cmp::Equal;
    if (t.text == "!=") return Cmp::NotEqual;
    return std::nullopt;
}

std::shared_ptr<Formula> node(Formula::Kind k) {
    auto f = std::make_shared<Formula>();
    f->kind = k;
    return f;
}

FormulaPtr make_true() { return node(Formula::Kind::True); }

class FormulaParser {
public:
    FormulaParser(const std::vector<Token>& toks, const Network& net, const PropertySet* ctx)
        : ts_(toks), net_(net), ctx_(ctx) {}

    FormulaPtr parse_all() {
        auto f = state();
        ts_.expect_end();
        return f;
    }

    std::pair<std::vector<double>, double> linexpr() {
        std::vector<double> c(net_.species.size(), 0.0);
        double off = 0.0;
        double sign = 1.0;
        if (ts_.accept("-")) sign = -1.0;
        while (true) {
            const Token& t = ts_.peek();
            if (t.kind == Token::Number) {
                ts_.next();
                double v = t.number;
                bool times = ts_.accept("*");
                // `2 X` is a product, `5 U<=3 ...` is a number before the until.
                bool implicit = ts_.peek().kind == Token::Ident && net_.species_index(ts_.peek().text);
                if (times || implicit) {
                    const Token& s = ts_.expect_ident();
                    c[species(s)] += sign * v;
                } else {
                    off += sign * v;
                }
            } else if (t.kind == Token::Ident) {
                ts_.next();
                c[species(t)] += sign;
            } else {
                throw ts_.error(t, "expected a species or a number");
            }
            if (ts_.accept("+"))
                sign = 1.0;
            else if (ts_.accept("-"))
                sign = -1.0;
            else
                break;
        }
        return {c, off};
    }

private:
    TokenStream ts_;
    const Network& net_;
    const PropertySet* ctx_;

    int species(const Token& t) {
        auto i = net_.species_index(t.text);
        if (!i) throw ts_.error(t, "unknown species '" + t.text + "'");
        return *i;
    }

    FormulaPtr state() {
        auto lhs = conj();
        while (ts_.peek().is("|") || ts_.peek().is("||")) {
            ts_.next();
            auto f = node(Formula::Kind::Or);
            f->left = lhs;
            f->right = conj();
            lhs = f;
        }
        return lhs;
    }

    FormulaPtr conj() {
        auto lhs = unary();
        while (ts_.peek().is("&") || ts_.peek().is("&&")) {
            ts_.next();
            auto f = node(Formula::Kind::And);
            f->left = lhs;
            f->right = unary();
            lhs = f;
        }
        return lhs;
    }

    FormulaPtr unary() {
        if (ts_.accept("!")) {
            auto f = node(Formula::Kind::Not);
            f->left = unary();
            return f;
        }
        return atom();
    }

    bool starts_operator(char letter) {
        const Token& t = ts_.peek();
        if (!t.is_word(std::string(1, letter))) return false;
        const Token& n = ts_.peek(1);
        if (n.is("=?") || n.is("{")) return true;
        // `P >= 0.5 [` is an operator, `P >= 5` a predicate on species P.
        return cmp_token(n) && ts_.peek(2).kind == Token::Number && ts_.peek(3).is("[");
    }

    FormulaPtr atom() {
        const Token& t = ts_.peek();
        if (t.is_word("true")) {
            ts_.next();
            return make_true();
        }
        if (t.is_word("false")) {
            ts_.next();
            auto f = node(Formula::Kind::Not);
            f->left = make_true();
            return f;
        }
        if (t.is("(")) {
            // Linear expressions are written without parentheses.
            ts_.next();
            auto f = state();
            ts_.expect(")");
            return f;
        }
        if (starts_operator('P')) return prob();
        if (starts_operator('R')) return reward();
        if (starts_operator('E')) return expect();
        return predicate();
    }

    FormulaPtr predicate() {
        auto [lc, lo] = linexpr();
        auto op = cmp_token(ts_.peek());
        if (!op) throw ts_.error(ts_.peek(), "expected a comparison");
        ts_.next();
        auto [mc, mo] = linexpr();
        auto f = node(Formula::Kind::Atom);
        f->atom = make_pred(lc, lo, *op, mc, mo);
        if (auto op2 = cmp_token(ts_.peek())) {
            // a <= X <= b
            ts_.next();
            auto [rc, ro] = linexpr();
            auto g = node(Formula::Kind::Atom);
            g->atom = make_pred(mc, mo, *op2, rc, ro);
            auto both = node(Formula::Kind::And);
            both->left = f;
            both->right = g;
            return both;
        }
        return f;
    }

    Predicate make_pred(const std::vector<double>& lc, double lo, Cmp op, const std::vector<double>& rc, double ro) {
        Predicate p;
        p.coeffs.resize(lc.size());
        for (std::size_t i = 0; i < lc.size(); ++i) p.coeffs[i] = lc[i] - rc[i];
        p.offset = lo - ro;
        p.op = op;
        return p;
    }

    std::optional<Bound> bound(bool probability) {
        if (ts_.accept("=?")) return std::nullopt;
        const Token& t = ts_.peek();
        auto op = cmp_token(t);
        if (!op || *op == Cmp::Equal || *op == Cmp::NotEqual) throw ts_.error(t, "expected '=?' or a comparison");
        ts_.next();
        bool neg = ts_.accept("-");
        const Token& v = ts_.expect_number();
        double value = neg ? -v.number : v.number;
        if (probability && (value < 0.0 || value > 1.0)) throw ts_.error(v, "probability threshold outside [0, 1]");
        return Bound{*op, value};
    }

    double number() {
        const Token& t = ts_.expect_number();
        return t.number;
    }

    // `<= t` or `[a, b]`
    std::pair<double, double> time_bound() {
        if (ts_.accept("<=")) return {0.0, number()};
        const Token& at = ts_.expect("[");
        double a = number();
        ts_.expect(",");
        double b = number();
        ts_.expect("]");
        if (a > b) throw ts_.error(at, "time interval has lower bound above upper bound");
        return {a, b};
    }

    bool temporal_next(const char* word) {
        const Token& t = ts_.peek();
        if (!t.is_word(word)) return false;
        const Token& n = ts_.peek(1);
        if (std::string_view(word) == "X") {
            if (n.kind == Token::End || n.is(")") || n.is("]")) return false;
            if (cmp_token(n) || n.is("+") || n.is("-") || n.is("*") || n.is("&") || n.is("|")) return false;
            return true;
        }
        return n.is("<=") || n.is("[");
    }

    FormulaPtr prob() {
        ts_.next();
        auto f = node(Formula::Kind::Prob);
        f->bound = bound(true);
        ts_.expect("[");
        if (temporal_next("X")) {
            ts_.next();
            f->path = Formula::Path::Next;
            f->right = state();
        } else if (temporal_next("F")) {
            ts_.next();
            f->path = Formula::Path::Until;
            std::tie(f->t_lo, f->t_hi) = time_bound();
            f->left = make_true();
            f->right = state();
        } else if (temporal_next("G")) {
            ts_.next();
            f->path = Formula::Path::Globally;
            std::tie(f->t_lo, f->t_hi) = time_bound();
            f->right = state();
        } else {
            f->path = Formula::Path::Until;
            f->left = state();
            ts_.expect_word("U");
            std::tie(f->t_lo, f->t_hi) = time_bound();
            f->right = state();
        }
        ts_.expect("]");
        return f;
    }

    std::string braced_name() {
        if (!ts_.accept("{")) return {};
        const Token& t = ts_.expect_ident();
        ts_.expect("}");
        return t.text;
    }

    FormulaPtr reward() {
        const Token& at = ts_.next();
        std::string name = braced_name();
        if (ctx_) {
            if (name.empty()) {
                if (ctx_->rewards.size() != 1) throw ts_.error(at, "R needs {name} when several rewards exist");
                name = ctx_->rewards.front().name;
            } else if (!ctx_->reward(name)) {
                throw ts_.error(at, "unknown reward structure '" + name + "'");
            }
        }
        auto b = bound(false);
        ts_.expect("[");
        std::shared_ptr<Formula> f;
        if (ts_.accept_word("C")) {
            f = node(Formula::Kind::RewardCum);
            ts_.expect("<=");
            f->t_hi = number();
        } else {
            ts_.expect_word("I");
            f = node(Formula::Kind::RewardInst);
            ts_.expect("=");
            f->t_hi = number();
        }
        f->t_lo = f->t_hi;
        f->bound = b;
        f->name = name;
        ts_.expect("]");
        return f;
    }

    FormulaPtr expect() {
        const Token& at = ts_.next();
        std::string name = braced_name();
        if (ctx_) {
            if (name.empty()) {
                if (ctx_->posts.size() != 1) throw ts_.error(at, "E needs {name} when several post functions exist");
                name = ctx_->posts.front().name;
            } else if (!ctx_->post(name)) {
                throw ts_.error(at, "unknown post-processing function '" + name + "'");
            }
        } else if (name.empty()) {
            throw ts_.error(at, "E needs a registered post-processing function");
        }
        auto f = node(Formula::Kind::Expect);
        f->bound = bound(false);
        ts_.expect("[");
        ts_.expect_word("I");
        ts_.expect("=");
        f->t_hi = f->t_lo = number();
        ts_.expect("]");
        f->name = name;
        return f;
    }
};

std::vector<Token> slice(const std::vector<Token>& toks, std::size_t from, std::size_t to) {
    std::vector<Token> out(toks.begin() + from, toks.begin() + to);
    Token end;
    end.kind = Token::End;
    end.line = to < toks.size() ? toks[to].line : toks.back().line;
    end.column = to < toks.size() ? toks[to].column : toks.back().column;
    out.push_back(end);
    return out;
}

std::string source_of(std::string_view text, const std::vector<Token>& toks, std::size_t from) {
    // Recover the original line for reports.
    int line = toks[from].line;
    int cur = 1;
    std::size_t start = 0;
    while (cur < line && start < text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
        ++cur;
    }
    std::size_t end = text.find('\n', start);
    std::string s(text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
    auto hash = s.find('#');
    if (hash != std::string::npos) s.resize(hash);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t lead = 0;
    while (lead < s.size() && std::isspace(static_cast<unsigned char>(s[lead]))) ++lead;
    return s.substr(lead);
}

}  // namespace

FormulaPtr parse_formula(std::string_view text, const Network& net, const PropertySet* context) {
    auto toks = tokenize(text, 1);
    FormulaParser p(toks, net, context);
    auto f = std::const_pointer_cast<Formula>(p.parse_all());
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    f->text = s;
    return f;
}

PropertySet parse_properties(std::string_view text, const Network& net) {
    auto toks = tokenize(text, 1);
    PropertySet props;
    std::size_t i = 0;
    while (toks[i].kind != Token::End) {
        const Token& t = toks[i];
        if (t.is_word("reward") && toks[i + 1].kind == Token::Ident && toks[i + 2].is("{")) {
            RewardStructure r;
            r.name = toks[i + 1].text;
            if (props.reward(r.name)) throw ParseError(t.line, t.column, "duplicate reward '" + r.name + "'");
            i += 3;
            std::size_t close = i;
            while (toks[close].kind != Token::End && !toks[close].is("}")) ++close;
            if (toks[close].kind == Token::End) throw ParseError(t.line, t.column, "unterminated reward block");
            auto body = slice(toks, i, close);
            TokenStream ts(body);
            while (!ts.at_end()) {
                // Predicates in reward items: `lhs cmp rhs : value;`
                std::size_t start = ts.position();
                std::size_t colon = start;
                while (body[colon].kind != Token::End && !body[colon].is(":")) ++colon;
                if (body[colon].kind == Token::End) throw ts.error(body[start], "expected ':' in reward item");
                auto ptoks = slice(body, start, colon);
                FormulaParser pp(ptoks, net, nullptr);
                FormulaPtr pred = pp.parse_all();
                ts.rewind(colon + 1);
                bool neg = ts.accept("-");
                double v = ts.expect_number().number;
                if (neg) v = -v;
                if (v < 0) throw ts.error(body[colon], "reward rates must be non-negative");
                if (!ts.accept(";") && !ts.at_end()) throw ts.error(ts.peek(), "expected ';'");
                RewardItem item{{}, v};
                std::vector<FormulaPtr> stack{pred};
                while (!stack.empty()) {
                    auto f = stack.back();
                    stack.pop_back();
                    if (f->kind == Formula::Kind::And) {
                        stack.push_back(f->right);
                        stack.push_back(f->left);
                    } else if (f->kind == Formula::Kind::Atom) {
                        item.when.push_back(f->atom);
                    } else if (f->kind != Formula::Kind::True) {
                        throw ts.error(body[start], "reward guards must be conjunctions of comparisons");
                    }
                }
                r.items.push_back(std::move(item));
            }
            props.rewards.push_back(std::move(r));
            i = close + 1;
            continue;
        }
        if (t.is_word("post")) {
            // post NAME = mqd(S)   or   post mqd(S)
            std::size_t j = i + 1;
            std::string name;
            if (toks[j].kind == Token::Ident && toks[j + 1].is("=")) {
                name = toks[j].text;
                j += 2;
            }
            if (!toks[j].is_word("mqd") || !toks[j + 1].is("(") || toks[j + 2].kind != Token::Ident ||
                !toks[j + 3].is(")"))
                throw ParseError(toks[j].line, toks[j].column, "expected mqd(Species)");
            PostFunction pf;
            pf.kind = "mqd";
            auto sp = net.species_index(toks[j + 2].text);
            if (!sp)
                throw ParseError(toks[j + 2].line, toks[j + 2].column, "unknown species '" + toks[j + 2].text + "'");
            pf.species = *sp;
            pf.name = name.empty() ? "mqd(" + toks[j + 2].text + ")" : name;
            if (props.post(pf.name)) throw ParseError(t.line, t.column, "duplicate post function '" + pf.name + "'");
            props.posts.push_back(pf);
            i = j + 4;
            continue;
        }
        // A formula runs to the end of its line.
        std::size_t end = i;
        while (toks[end].kind != Token::End && toks[end].line == t.line) ++end;
        auto ftoks = slice(toks, i, end);
        FormulaParser fp(ftoks, net, &props);
        auto f = std::const_pointer_cast<Formula>(fp.parse_all());
        f->text = source_of(text, toks, i);
        props.formulas.push_back(f);
        i = end;
    }
    return props;
}

PropertySet load_properties(const std::string& path, const Network& net) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_properties(ss.str(), net);
}

}  // namespace stochrob
