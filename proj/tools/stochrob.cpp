#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "stochrob/csl.hpp"
#include "stochrob/landscape.hpp"
#include "stochrob/robustness.hpp"

using namespace stochrob;

namespace {

enum Exit { Ok = 0, Residual = 2, BadInput = 3, OverBudget = 4 };

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string model, props, property, consts, point, initial = "single";
    std::string semantics = "absolute", threshold, out, format = "json";
    double err = 0.01, eps = 1e-6, time_limit = 0;
    int threads = 1;
    std::size_t max_boxes = 100000, max_states = 10'000'000;
    int self_check = 0;
    unsigned long long seed = 1;
};

std::vector<std::pair<std::string, double>> assignments(const std::string& text) {
    std::vector<std::pair<std::string, double>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("expected name=value, got '" + item + "'");
        std::string name = item.substr(0, eq);
        name.erase(0, name.find_first_not_of(' '));
        name.erase(name.find_last_not_of(' ') + 1);
        try {
            out.emplace_back(name, std::stod(item.substr(eq + 1)));
        } catch (const std::exception&) {
            throw InputError("bad number in '" + item + "'");
        }
    }
    return out;
}

// Everything a subcommand needs, built once from the options.
struct Session {
    Network net;
    StateSpace space;
    std::unique_ptr<ParametricMatrix> matrix;
    PropertySet props;
    std::vector<int> initial;

    explicit Session(const Options& o) {
        net = load_model(o.model);
        for (auto& [name, value] : assignments(o.consts)) net.fix(name, value);

        std::vector<std::vector<int>> extra;
        const std::string list_tag = "list:";
        if (o.initial.rfind(list_tag, 0) == 0) {
            std::stringstream ss(o.initial.substr(list_tag.size()));
            std::string one;
            while (std::getline(ss, one, ';')) {
                std::vector<int> s = net.initial_state();
                for (auto& [name, value] : assignments(one)) {
                    auto idx = net.species_index(name);
                    if (!idx) throw InputError("unknown species '" + name + "' in initial state");
                    s[*idx] = static_cast<int>(value);
                }
                if (!net.admissible(s)) throw InputError("initial state '" + one + "' violates bounds or constraints");
                extra.push_back(s);
            }
            if (extra.empty()) throw InputError("empty initial-state list");
        } else if (o.initial != "single" && o.initial != "all") {
            throw InputError("--initial-states must be single, all or list:...");
        }
        space = enumerate(net, extra, o.max_states);
        matrix = std::make_unique<ParametricMatrix>(net, space);
        if (!o.props.empty()) props = load_properties(o.props, net);

        if (o.initial == "all") {
            for (int i = 0; i < space.size(); ++i) initial.push_back(i);
        } else if (!extra.empty()) {
            for (const auto& s : extra) initial.push_back(*space.find(s));
        } else {
            initial.push_back(space.initial().front());
        }
    }

    std::vector<FormulaPtr> formulas(const std::string& selector) const {
        if (selector.empty()) return props.formulas;
        bool numeric = selector.find_first_not_of("0123456789") == std::string::npos;
        if (numeric) {
            std::size_t k = std::stoul(selector);
            if (k < 1 || k > props.formulas.size())
                throw InputError("property index " + selector + " out of range");
            return {props.formulas[k - 1]};
        }
        return {parse_formula(selector, net, &props)};
    }
};

std::string describe_state(const Network& net, std::span<const int> s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) out += ' ';
        out += net.species[i].name + '=' + std::to_string(s[i]);
    }
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

int cmd_validate(const Options& o) {
    Session s(o);
    std::cout << s.space.size() << " states, " << s.matrix->num_transitions() << " transitions\n";
    std::cout << s.net.species.size() << " species, " << s.net.reactions.size() << " reactions\n";
    for (const auto& d : s.net.dims) std::cout << "param " << d.name << " in " << d.range << "\n";
    if (auto q = uniformization_rate(*s.matrix, s.net.space()))
        std::cout << "uniformization rate " << fmt(*q) << "\n";
    for (const auto& f : s.props.formulas) std::cout << "property " << f->text << "\n";
    return Ok;
}

int cmd_check(const Options& o) {
    Session s(o);
    Box box = s.net.space();
    for (auto& [name, value] : assignments(o.point)) {
        auto d = s.net.dim_index(name);
        if (!d) throw InputError("'" + name + "' is not a parameter");
        if (!box[*d].contains(value))
            throw InputError("point " + name + "=" + fmt(value) + " lies outside " + fmt(box[*d].lo) + ".." +
                             fmt(box[*d].hi));
        box[*d] = {value, value};
    }
    auto formulas = s.formulas(o.property);
    if (formulas.empty()) throw InputError("no properties to check");
    CheckOptions opt;
    opt.eps = o.eps;
    for (const auto& f : formulas) {
        Checker checker(*s.matrix, s.props, box, opt);
        auto values = checker.evaluate(*f, s.initial);
        std::cout << f->text << "\n";
        for (std::size_t i = 0; i < values.size(); ++i) {
            const Interval& v = values[i];
            std::cout << "  ";
            if (s.initial.size() > 1) std::cout << describe_state(s.net, s.space.state(s.initial[i])) << ": ";
            if (v.lo == v.hi)
                std::cout << fmt(v.lo) << "\n";
            else
                std::cout << "[" << fmt(v.lo) << ", " << fmt(v.hi) << "]\n";
        }
    }
    std::cout << "eps " << fmt(o.eps) << "\n";
    return Ok;
}

void parse_threshold(const std::string& text, EvaluationSemantics& sem) {
    if (text.empty()) return;
    std::size_t pos = 0;
    for (auto [tok, op] : {std::pair{">=", Cmp::GreaterEq}, {"<=", Cmp::LessEq}, {">", Cmp::Greater}, {"<", Cmp::Less}})
        if (text.rfind(tok, 0) == 0) {
            sem.op = op;
            pos = std::string(tok).size();
            break;
        }
    try {
        sem.threshold = std::stod(text.substr(pos));
    } catch (const std::exception&) {
        throw InputError("bad threshold '" + text + "'");
    }
}

// Sample points, evaluate them exactly and confirm they sit inside their box.
int self_check(const Session& s, const Formula& f, const RobustnessResult& res, const Options& o) {
    std::mt19937_64 rng(o.seed);
    int violations = 0;
    CheckOptions opt;
    opt.eps = o.eps;
    opt.q = uniformization_rate(*s.matrix, res.space).value_or(1.0);
    for (int k = 0; k < o.self_check; ++k) {
        const Subspace& box = res.boxes[std::uniform_int_distribution<std::size_t>(0, res.boxes.size() - 1)(rng)];
        Box point = box.box;
        for (auto& iv : point) {
            double v = std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng);
            iv = {v, v};
        }
        Checker checker(*s.matrix, s.props, point, opt);
        auto eval = checker.evaluate(f, res.initial);
        for (std::size_t i = 0; i < eval.size(); ++i)
            if (eval[i].lo < box.eval[i].lo - 1e-9 || eval[i].hi > box.eval[i].hi + 1e-9) ++violations;
    }
    std::cout << "self-check " << o.self_check << " points, " << violations << " outside their box\n";
    return violations;
}

int cmd_robustness(const Options& o) {
    Session s(o);
    auto formulas = s.formulas(o.property.empty() ? "1" : o.property);
    const Formula& f = *formulas.front();

    AnalysisConfig cfg;
    cfg.err = o.err;
    cfg.eps = o.eps;
    cfg.semantics = EvaluationSemantics::parse(o.semantics);
    parse_threshold(o.threshold, cfg.semantics);
    cfg.initial = s.initial;
    cfg.max_boxes = o.max_boxes;
    if (o.time_limit > 0) cfg.time_limit = o.time_limit;
    cfg.threads = o.threads;
    if (o.format != "json" && o.format != "csv") throw InputError("--format must be json or csv");

    auto start = std::chrono::steady_clock::now();
    RobustnessResult res = analyze(*s.matrix, s.props, f, cfg);
    std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    PiecewiseEstimate pw = piecewise_linear(res);

    std::cout << "formula   " << res.formula << "\n";
    std::cout << "semantics " << res.semantics << (res.approximate ? " (approximate)" : "") << "\n";
    std::cout << "R in [" << fmt(res.r.lo) << ", " << fmt(res.r.hi) << "]  estimate " << fmt(res.estimate())
              << " +- " << fmt(res.err()) << "\n";
    std::cout << "piecewise-linear [" << fmt(pw.r.lo) << ", " << fmt(pw.r.hi) << "] (no guarantee)\n";
    if (res.initial.size() > 1)
        for (std::size_t i = 0; i < res.initial.size(); ++i)
            std::cout << "  " << describe_state(s.net, s.space.state(res.initial[i])) << ": [" << fmt(res.per_state[i].lo)
                      << ", " << fmt(res.per_state[i].hi) << "]\n";
    std::cout << res.boxes.size() << " boxes, status " << to_string(res.status) << ", runtime " << fmt(took.count())
              << " s\n";
    for (int k : res.violating) {
        const auto& b = res.boxes[k];
        std::cout << "  residual box";
        for (const auto& iv : b.box) std::cout << ' ' << iv;
        std::cout << " gap " << fmt(b.max_gap()) << "\n";
    }
    if (!o.out.empty()) {
        std::ofstream file(o.out);
        if (!file) throw InputError("cannot write " + o.out);
        file << (o.format == "csv" ? landscape_csv(res) : landscape_json(res, &pw));
    }
    if (o.self_check > 0 && self_check(s, f, res, o) > 0) return Residual;
    return res.status == Status::Success ? Ok : res.status == Status::Residual ? Residual : OverBudget;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robustness analysis of stochastic reaction networks"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* sub, bool props_required) {
        sub->add_option("model", o.model, "Reaction network file")->required()->check(CLI::ExistingFile);
        auto p = sub->add_option("properties", o.props, "Property file")->check(CLI::ExistingFile);
        if (props_required) p->required();
        sub->add_option("--const", o.consts, "Override constants or fix parameters: name=value,...")
            ->envname("STOCHROB_CONST");
        sub->add_option("--max-states", o.max_states, "State-space size limit")->envname("STOCHROB_MAX_STATES");
        sub->add_option("--initial-states", o.initial, "single | all | list:S=v,...;S=v,...")
            ->envname("STOCHROB_INITIAL_STATES");
    };

    auto validate = app.add_subcommand("validate", "Parse inputs and report state-space size");
    common(validate, false);

    auto check = app.add_subcommand("check", "Evaluate properties at a point or over the whole box");
    common(check, false);
    check->add_option("--point", o.point, "Parameter values: name=value,...")->envname("STOCHROB_POINT");
    check->add_option("--property", o.property, "1-based index into the property file, or a formula")
        ->envname("STOCHROB_PROPERTY");
    check->add_option("--eps", o.eps, "Truncation error of transient analysis")
        ->check(CLI::Range(0.0, 1.0))
        ->envname("STOCHROB_EPS");

    auto rob = app.add_subcommand("robustness", "Refine the parameter space and bound robustness");
    common(rob, true);
    rob->add_option("--property", o.property, "1-based index into the property file, or a formula")
        ->envname("STOCHROB_PROPERTY");
    rob->add_option("--err", o.err, "Required absolute error per box")
        ->check(CLI::PositiveNumber)
        ->envname("STOCHROB_ERR");
    rob->add_option("--eps", o.eps, "Truncation error of transient analysis")
        ->check(CLI::Range(0.0, 1.0))
        ->envname("STOCHROB_EPS");
    rob->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber)->envname("STOCHROB_THREADS");
    rob->add_option("--semantics", o.semantics, "boolean | relative | absolute | variance:min|max|avg")
        ->envname("STOCHROB_SEMANTICS");
    rob->add_option("--threshold", o.threshold, "Threshold r, optionally with comparator, e.g. >=0.8")
        ->envname("STOCHROB_THRESHOLD");
    rob->add_option("--out", o.out, "Landscape output file")->envname("STOCHROB_OUT");
    rob->add_option("--format", o.format, "json | csv")->envname("STOCHROB_FORMAT");
    rob->add_option("--max-boxes", o.max_boxes, "Box budget")->envname("STOCHROB_MAX_BOXES");
    rob->add_option("--time-limit", o.time_limit, "Wall-clock budget in seconds")->envname("STOCHROB_TIME_LIMIT");
    rob->add_option("--self-check", o.self_check, "Sample this many points and verify them exactly")
        ->envname("STOCHROB_SELF_CHECK");
    rob->add_option("--seed", o.seed, "Seed for --self-check sampling")->envname("STOCHROB_SEED");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? Ok : BadInput;
    }

    try {
        if (*validate) return cmd_validate(o);
        if (*check) return cmd_check(o);
        return cmd_robustness(o);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadInput;
    } catch (const StateLimitExceeded& e) {
        std::cerr << "error: " << e.what() << "\n";
        return OverBudget;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadInput;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return BadInput;
    }
}
