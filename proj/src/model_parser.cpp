#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "stochrob/model.hpp"
#include "lexer.hpp"

namespace stochrob {

ParseError::ParseError(int line, int column, const std::string& msg)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + msg),
      line_(line),
      column_(column) {}

namespace {

struct Statement {
    int line;
    std::vector<Token> tokens;
};

class ModelParser {
public:
    explicit ModelParser(std::string_view text) {
        int line = 1;
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string_view::npos) end = text.size();
            auto toks = tokenize(text.substr(start, end - start), line);
            if (toks.size() > 1) lines_.push_back({line, std::move(toks)});
            ++line;
            start = end + 1;
        }
    }

    Network parse() {
        // Declarations first so reactions may refer to names declared later.
        for (auto& st : lines_) {
            TokenStream ts(st.tokens);
            const Token& kw = ts.peek();
            if (kw.is_word("species"))
                parse_species(ts);
            else if (kw.is_word("const"))
                parse_const(ts);
            else if (kw.is_word("param"))
                parse_param(ts);
            else if (!kw.is_word("reaction") && !kw.is_word("constraint"))
                throw ts.error(kw, "expected 'species', 'const', 'param', 'constraint' or 'reaction'");
        }
        for (auto& st : lines_) {
            TokenStream ts(st.tokens);
            if (ts.peek().is_word("reaction"))
                parse_reaction(ts);
            else if (ts.peek().is_word("constraint"))
                parse_constraint(ts);
        }
        check_initial();
        return std::move(net_);
    }

private:
    std::vector<Statement> lines_;
    Network net_;
    std::map<std::string, Token> declared_;

    void declare(const Token& name, TokenStream& ts) {
        if (declared_.count(name.text)) {
            bool both_species = net_.species_index(name.text).has_value();
            throw ts.error(name, (both_species ? "duplicate species '" : "duplicate name '") +
                                     name.text + "'");
        }
        declared_.emplace(name.text, name);
    }

    int signed_int(TokenStream& ts) {
        bool neg = ts.accept("-");
        const Token& t = ts.expect_number();
        double v = t.number;
        if (v != std::floor(v)) throw ts.error(t, "expected an integer");
        return neg ? -static_cast<int>(v) : static_cast<int>(v);
    }

    double signed_number(TokenStream& ts) {
        bool neg = ts.accept("-");
        double v = ts.expect_number().number;
        return neg ? -v : v;
    }

    // species NAME bound N [init N]
    // species NAME in [LO, HI] [init N]
    void parse_species(TokenStream& ts) {
        ts.expect_word("species");
        const Token& name = ts.expect_ident();
        declare(name, ts);
        Species sp;
        sp.name = name.text;
        const Token& kw = ts.peek();
        if (ts.accept_word("bound")) {
            const Token& at = ts.peek();
            sp.max = signed_int(ts);
            if (sp.max < 0) throw ts.error(at, "negative bound for species '" + sp.name + "'");
        } else if (ts.accept_word("in")) {
            ts.expect("[");
            const Token& at = ts.peek();
            sp.min = signed_int(ts);
            ts.expect(",");
            sp.max = signed_int(ts);
            ts.expect("]");
            if (sp.min < 0 || sp.max < 0)
                throw ts.error(at, "negative bound for species '" + sp.name + "'");
            if (sp.min > sp.max) throw ts.error(at, "empty population range for '" + sp.name + "'");
        } else {
            throw ts.error(kw, "expected 'bound' or 'in'");
        }
        sp.init = sp.min;
        if (ts.accept_word("init")) {
            const Token& at = ts.peek();
            sp.init = signed_int(ts);
            if (sp.init < sp.min || sp.init > sp.max)
                throw ts.error(at, "init out of bounds for species '" + sp.name + "'");
        }
        ts.expect_end();
        net_.species.push_back(sp);
    }

    void parse_const(TokenStream& ts) {
        ts.expect_word("const");
        const Token& name = ts.expect_ident();
        declare(name, ts);
        ts.expect("=");
        net_.constants.push_back({name.text, signed_number(ts)});
        ts.expect_end();
    }

    void parse_param(TokenStream& ts) {
        ts.expect_word("param");
        const Token& name = ts.expect_ident();
        declare(name, ts);
        ts.expect_word("in");
        const Token& at = ts.expect("[");
        double lo = signed_number(ts);
        ts.expect(",");
        double hi = signed_number(ts);
        ts.expect("]");
        ts.expect_end();
        if (lo > hi) throw ts.error(at, "empty interval for parameter '" + name.text + "'");
        if (lo < 0) throw ts.error(at, "parameter '" + name.text + "' must be non-negative");
        net_.dims.push_back({name.text, {lo, hi}});
    }

    int species_ref(TokenStream& ts, const Token& t) {
        auto idx = net_.species_index(t.text);
        if (!idx) throw ts.error(t, "unknown identifier '" + t.text + "'");
        return *idx;
    }

    // Empty, `0`, or `[n] S + [n] S ...`.
    std::vector<int> parse_side(TokenStream& ts, const std::function<bool(const Token&)>& stop) {
        std::vector<int> stoich(net_.species.size(), 0);
        if (stop(ts.peek())) return stoich;
        if (ts.peek().kind == Token::Number && ts.peek().number == 0.0 &&
            ts.peek(1).kind != Token::Ident) {
            ts.next();
            return stoich;
        }
        while (true) {
            int n = 1;
            if (ts.peek().kind == Token::Number) {
                const Token& t = ts.next();
                if (t.number != std::floor(t.number) || t.number < 1)
                    throw ts.error(t, "stoichiometry must be a positive integer");
                n = static_cast<int>(t.number);
                ts.accept("*");
            }
            const Token& s = ts.expect_ident();
            stoich[species_ref(ts, s)] += n;
            if (!ts.accept("+")) break;
        }
        return stoich;
    }

    ParamRef parse_arg(TokenStream& ts) {
        ParamRef ref;
        const Token& t = ts.peek();
        if (t.kind == Token::Number || t.is("-")) {
            double v = signed_number(ts);
            if (!ts.accept("*")) {
                ref.value = v;
                return ref;
            }
            if (v <= 0) throw ts.error(t, "parameter factor must be positive");
            ref.scale = v;
        }
        const Token& name = ts.expect_ident();
        ref.name = name.text;
        if (auto d = net_.dim_index(name.text)) {
            ref.dim = *d;
        } else if (auto c = net_.constant(name.text)) {
            ref.value = ref.scale * *c;
        } else {
            throw ts.error(name, "unknown identifier '" + name.text + "'");
        }
        return ref;
    }

    void check_positive(TokenStream& ts, const Token& at, const ParamRef& p, const char* what) {
        Interval r = p.over(net_.space());
        if (r.lo <= 0.0) throw ts.error(at, std::string(what) + " must be positive");
    }

    Kinetics parse_kinetics(TokenStream& ts, const Reaction& r) {
        Kinetics k;
        const Token& fn = ts.expect_ident();
        ts.expect("(");
        const Token& first = ts.peek();
        if (fn.text == "mass_action") {
            k.kind = KineticsKind::MassAction;
            k.rate = parse_arg(ts);
        } else if (fn.text == "hill") {
            k.kind = KineticsKind::Hill;
            k.rate = parse_arg(ts);
            ts.expect(",");
            const Token& at_half = ts.peek();
            k.half = parse_arg(ts);
            check_positive(ts, at_half, k.half, "Hill constant");
            ts.expect(",");
            const Token& at_n = ts.peek();
            k.coeff = parse_arg(ts);
            check_positive(ts, at_n, k.coeff, "Hill coefficient");
        } else if (fn.text == "sigmoid") {
            k.kind = KineticsKind::Sigmoid;
            k.rate = parse_arg(ts);
            ts.expect(",");
            const Token& at_n = ts.peek();
            k.coeff = parse_arg(ts);
            check_positive(ts, at_n, k.coeff, "sigmoid coefficient");
            k.half.value = 30.0;
            if (ts.accept(",")) {
                const Token& at_half = ts.peek();
                k.half = parse_arg(ts);
                check_positive(ts, at_half, k.half, "sigmoid half point");
            }
        } else {
            throw ts.error(fn, "unknown kinetics '" + fn.text + "'");
        }
        if (k.rate.over(net_.space()).lo < 0.0) throw ts.error(first, "rate constant must be non-negative");
        if (k.kind != KineticsKind::MassAction) {
            if (ts.accept(";")) {
                do {
                    k.regulator.push_back(species_ref(ts, ts.expect_ident()));
                } while (ts.accept("+"));
            } else if (k.kind == KineticsKind::Sigmoid) {
                // Default regulator: the single species the reaction produces.
                int produced = -1;
                for (std::size_t i = 0; i < r.change.size(); ++i) {
                    if (r.change[i] > 0) {
                        if (produced >= 0) throw ts.error(fn, "sigmoid needs an explicit regulator");
                        produced = static_cast<int>(i);
                    }
                }
                if (produced < 0) throw ts.error(fn, "sigmoid needs an explicit regulator");
                k.regulator.push_back(produced);
            } else {
                throw ts.error(ts.peek(), "expected ';' and a regulator species");
            }
        }
        ts.expect(")");
        return k;
    }

    // reaction NAME: SIDE -> SIDE @ KINETICS
    void parse_reaction(TokenStream& ts) {
        ts.expect_word("reaction");
        const Token& name = ts.expect_ident();
        for (const auto& other : net_.reactions)
            if (other.name == name.text) throw ts.error(name, "duplicate reaction '" + name.text + "'");
        ts.expect(":");
        Reaction r;
        r.name = name.text;
        r.reactants = parse_side(ts, [](const Token& t) { return t.is("->"); });
        ts.expect("->");
        r.products = parse_side(ts, [](const Token& t) { return t.is("@"); });
        bool any = false;
        r.change.resize(r.reactants.size());
        for (std::size_t i = 0; i < r.reactants.size(); ++i) {
            r.change[i] = r.products[i] - r.reactants[i];
            any = any || r.reactants[i] != 0 || r.products[i] != 0;
        }
        if (!any) throw ts.error(name, "reaction '" + name.text + "' has no reactants or products");
        ts.expect("@");
        r.kinetics = parse_kinetics(ts, r);
        ts.expect_end();
        auto dims = rate_dims(r);
        const Kinetics& k = r.kinetics;
        int uses = 0;
        for (const ParamRef* p : {&k.rate, &k.half, &k.coeff}) uses += p->perturbed();
        if (uses != static_cast<int>(dims.size()))
            throw ts.error(name, "a parameter may appear only once in one rate");
        net_.reactions.push_back(std::move(r));
    }

    // constraint [c*]S (+|-) [c*]S ... in [LO, HI]
    void parse_constraint(TokenStream& ts) {
        ts.expect_word("constraint");
        Constraint c;
        c.coeffs.assign(net_.species.size(), 0);
        int sign = 1;
        if (ts.accept("-")) sign = -1;
        while (true) {
            int n = 1;
            if (ts.peek().kind == Token::Number) {
                const Token& t = ts.next();
                if (t.number != std::floor(t.number)) throw ts.error(t, "expected an integer");
                n = static_cast<int>(t.number);
                ts.expect("*");
            }
            c.coeffs[species_ref(ts, ts.expect_ident())] += sign * n;
            if (ts.accept("+"))
                sign = 1;
            else if (ts.accept("-"))
                sign = -1;
            else
                break;
        }
        ts.expect_word("in");
        const Token& at = ts.expect("[");
        c.lo = signed_int(ts);
        ts.expect(",");
        c.hi = signed_int(ts);
        ts.expect("]");
        ts.expect_end();
        if (c.lo > c.hi) throw ts.error(at, "empty constraint range");
        net_.constraints.push_back(std::move(c));
    }

    void check_initial() {
        auto s0 = net_.initial_state();
        if (!net_.admissible(s0)) throw ParseError(0, 0, "initial state violates a constraint");
    }
};

}  // namespace

Network parse_model(std::string_view text) { return ModelParser(text).parse(); }

Network load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string arg_source(const Network& net, const ParamRef& p) {
    if (!p.perturbed()) return fmt(p.value);
    std::string n = net.dims[p.dim].name;
    return p.scale == 1.0 ? n : fmt(p.scale) + "*" + n;
}

std::string side_source(const Network& net, const std::vector<int>& st) {
    std::string out;
    for (std::size_t i = 0; i < st.size(); ++i) {
        if (st[i] == 0) continue;
        if (!out.empty()) out += " + ";
        if (st[i] != 1) out += std::to_string(st[i]) + " ";
        out += net.species[i].name;
    }
    return out.empty() ? "0" : out;
}

}  // namespace

std::string to_source(const Network& net) {
    std::ostringstream os;
    for (const auto& s : net.species)
        os << "species " << s.name << " in [" << s.min << ", " << s.max << "] init " << s.init << "\n";
    for (const auto& c : net.constants) os << "const " << c.name << " = " << fmt(c.value) << "\n";
    for (const auto& d : net.dims)
        os << "param " << d.name << " in [" << fmt(d.range.lo) << ", " << fmt(d.range.hi) << "]\n";
    for (const auto& c : net.constraints) {
        os << "constraint ";
        bool first = true;
        for (std::size_t i = 0; i < c.coeffs.size(); ++i) {
            int v = c.coeffs[i];
            if (v == 0) continue;
            if (!first) os << (v > 0 ? " + " : " - ");
            else if (v < 0) os << "-";
            if (std::abs(v) != 1) os << std::abs(v) << "*";
            os << net.species[i].name;
            first = false;
        }
        os << " in [" << c.lo << ", " << c.hi << "]\n";
    }
    for (const auto& r : net.reactions) {
        const Kinetics& k = r.kinetics;
        os << "reaction " << r.name << ": " << side_source(net, r.reactants) << " -> "
           << side_source(net, r.products) << " @ ";
        switch (k.kind) {
            case KineticsKind::MassAction:
                os << "mass_action(" << arg_source(net, k.rate) << ")";
                break;
            case KineticsKind::Hill:
            case KineticsKind::Sigmoid: {
                bool hill = k.kind == KineticsKind::Hill;
                os << (hill ? "hill(" : "sigmoid(") << arg_source(net, k.rate) << ", ";
                if (hill)
                    os << arg_source(net, k.half) << ", " << arg_source(net, k.coeff);
                else
                    os << arg_source(net, k.coeff) << ", " << arg_source(net, k.half);
                os << "; ";
                for (std::size_t i = 0; i < k.regulator.size(); ++i)
                    os << (i ? " + " : "") << net.species[k.regulator[i]].name;
                os << ")";
                break;
            }
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace stochrob
