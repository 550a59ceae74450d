#include "mfmine/builtin.hpp"

#include "mfmine/error.hpp"
#include "mfmine/suite.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace mfmine::builtin {

namespace {

using harness::TestStatus;

struct CompileFailure {
    std::string message;
};
struct RuntimeFailure {
    std::string message;
};
struct OutOfSteps {};

// ---------------------------------------------------------------------------
// syntax

struct Expr {
    enum class Kind { Num, Var, Call, Neg, Bin };
    Kind kind = Kind::Num;
    std::int64_t value = 0;
    std::string name;  // Var, Call; operator for Bin
    std::vector<Expr> kids;
};

struct Case {
    std::optional<Expr> cond;  // empty for `_`
    Expr value;
};

struct Scope;

struct Function {
    std::string name;
    std::vector<std::string> params;
    std::optional<Expr> body;
    std::vector<Case> cases;
    std::string where;  // file:line
    const Scope* scope = nullptr;
};

struct Scope {
    std::map<std::string, const Function*> fns;
    const std::map<std::string, std::int64_t>* globals = nullptr;
};

struct Let {
    std::string name;
    Expr value;
    std::string where;
};

struct Assert {
    std::string text;
    Expr expr;
};

struct Statements {
    std::optional<std::string> module;
    std::vector<std::string> imports;
    std::vector<Let> lets;
    std::vector<std::unique_ptr<Function>> fns;
    std::vector<Assert> asserts;
};

struct Token {
    enum class Kind { Int, Ident, Op, End };
    Kind kind = Kind::End;
    std::string text;
};

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
        s.remove_suffix(1);
    }
    return s;
}

class Parser {
public:
    Parser(std::string_view text, std::string where) : where_(std::move(where)) { lex(text); }

    [[noreturn]] void fail(const std::string& msg) const { throw CompileFailure{where_ + ": " + msg}; }

    const Token& peek() const { return toks_[pos_]; }
    bool at_end() const { return peek().kind == Token::Kind::End; }

    bool accept(std::string_view op) {
        if (peek().kind == Token::Kind::Op && peek().text == op) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(std::string_view op) {
        if (!accept(op)) {
            fail("expected '" + std::string(op) + "'");
        }
    }

    std::string ident() {
        if (peek().kind != Token::Kind::Ident) {
            fail("expected a name");
        }
        return toks_[pos_++].text;
    }

    void expect_end() {
        if (!at_end()) {
            fail("unexpected '" + peek().text + "'");
        }
    }

    Expr expr() {
        Expr lhs = sum();
        static const std::set<std::string, std::less<>> cmp = {"==", "!=", "<", "<=", ">", ">="};
        if (peek().kind == Token::Kind::Op && cmp.contains(peek().text)) {
            Expr e;
            e.kind = Expr::Kind::Bin;
            e.name = toks_[pos_++].text;
            e.kids.push_back(std::move(lhs));
            e.kids.push_back(sum());
            return e;
        }
        return lhs;
    }

private:
    void lex(std::string_view s) {
        std::size_t i = 0;
        while (i < s.size()) {
            const char c = s[i];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++i;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::size_t j = i;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) {
                    ++j;
                }
                toks_.push_back({Token::Kind::Int, std::string(s.substr(i, j - i))});
                i = j;
            } else if (is_ident_start(c)) {
                std::size_t j = i;
                while (j < s.size() && is_ident_char(s[j])) {
                    ++j;
                }
                toks_.push_back({Token::Kind::Ident, std::string(s.substr(i, j - i))});
                i = j;
            } else {
                static const char* two[] = {"==", "!=", "<=", ">=", "=>"};
                std::string op(1, c);
                for (const char* t : two) {
                    if (s.substr(i, 2) == t) {
                        op = t;
                    }
                }
                if (op.size() == 1 && std::string_view("+-*/%<>=(),{}").find(c) == std::string_view::npos) {
                    fail(std::string("unexpected character '") + c + "'");
                }
                toks_.push_back({Token::Kind::Op, op});
                i += op.size();
            }
        }
        toks_.push_back({Token::Kind::End, ""});
    }

    Expr sum() {
        Expr lhs = product();
        while (peek().kind == Token::Kind::Op && (peek().text == "+" || peek().text == "-")) {
            Expr e;
            e.kind = Expr::Kind::Bin;
            e.name = toks_[pos_++].text;
            e.kids.push_back(std::move(lhs));
            e.kids.push_back(product());
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr product() {
        Expr lhs = unary();
        while (peek().kind == Token::Kind::Op && (peek().text == "*" || peek().text == "/" || peek().text == "%")) {
            Expr e;
            e.kind = Expr::Kind::Bin;
            e.name = toks_[pos_++].text;
            e.kids.push_back(std::move(lhs));
            e.kids.push_back(unary());
            lhs = std::move(e);
        }
        return lhs;
    }

    Expr unary() {
        if (accept("-")) {
            Expr e;
            e.kind = Expr::Kind::Neg;
            e.kids.push_back(unary());
            return e;
        }
        return primary();
    }

    Expr primary() {
        const Token t = peek();
        if (t.kind == Token::Kind::Int) {
            ++pos_;
            Expr e;
            const auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), e.value);
            if (ec != std::errc()) {
                fail("integer literal out of range: " + t.text);
            }
            return e;
        }
        if (t.kind == Token::Kind::Ident) {
            ++pos_;
            Expr e;
            e.name = t.text;
            if (accept("(")) {
                e.kind = Expr::Kind::Call;
                if (!accept(")")) {
                    do {
                        e.kids.push_back(expr());
                    } while (accept(","));
                    expect(")");
                }
            } else {
                e.kind = Expr::Kind::Var;
            }
            return e;
        }
        if (accept("(")) {
            Expr e = expr();
            expect(")");
            return e;
        }
        fail(t.kind == Token::Kind::End ? "unexpected end of line" : "unexpected '" + t.text + "'");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    std::string where_;
};

bool starts_with_word(std::string_view line, std::string_view word) {
    return line.starts_with(word) && (line.size() == word.size() || !is_ident_char(line[word.size()]));
}

/// Parses `lines` (already numbered) into statements. `file` is for messages.
Statements parse_statements(const std::string& file, const std::vector<std::pair<std::size_t, std::string>>& lines) {
    Statements out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = trim(lines[i].second);
        const std::string where = file + ":" + std::to_string(lines[i].first);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (starts_with_word(line, "module")) {
            Parser p(line.substr(6), where);
            if (out.module) {
                p.fail("second module declaration");
            }
            out.module = p.ident();
            p.expect_end();
        } else if (starts_with_word(line, "import")) {
            Parser p(line.substr(6), where);
            out.imports.push_back(p.ident());
            p.expect_end();
        } else if (starts_with_word(line, "let")) {
            Parser p(line.substr(3), where);
            Let let;
            let.name = p.ident();
            let.where = where;
            p.expect("=");
            let.value = p.expr();
            p.expect_end();
            out.lets.push_back(std::move(let));
        } else if (starts_with_word(line, "assert")) {
            Parser p(line.substr(6), where);
            Assert a;
            a.text = std::string(trim(line.substr(6)));
            a.expr = p.expr();
            p.expect_end();
            out.asserts.push_back(std::move(a));
        } else if (starts_with_word(line, "fn")) {
            Parser p(line.substr(2), where);
            auto fn = std::make_unique<Function>();
            fn->where = where;
            fn->name = p.ident();
            p.expect("(");
            if (!p.accept(")")) {
                do {
                    fn->params.push_back(p.ident());
                } while (p.accept(","));
                p.expect(")");
            }
            if (p.accept("=")) {
                fn->body = p.expr();
                p.expect_end();
            } else {
                p.expect("{");
                p.expect_end();
                bool closed = false;
                while (++i < lines.size()) {
                    const auto cl = trim(lines[i].second);
                    const std::string cwhere = file + ":" + std::to_string(lines[i].first);
                    if (cl.empty() || cl.front() == '#') {
                        continue;
                    }
                    if (cl == "}") {
                        closed = true;
                        break;
                    }
                    const auto arrow = cl.find("=>");
                    if (arrow == std::string_view::npos) {
                        throw CompileFailure{cwhere + ": expected 'condition => value'"};
                    }
                    Case c;
                    const auto cond = trim(cl.substr(0, arrow));
                    if (cond != "_") {
                        Parser cp(cond, cwhere);
                        c.cond = cp.expr();
                        cp.expect_end();
                    }
                    Parser vp(cl.substr(arrow + 2), cwhere);
                    c.value = vp.expr();
                    vp.expect_end();
                    fn->cases.push_back(std::move(c));
                }
                if (!closed) {
                    throw CompileFailure{where + ": unterminated case table for '" + fn->name + "'"};
                }
            }
            std::set<std::string> seen;
            for (const auto& param : fn->params) {
                if (!seen.insert(param).second) {
                    throw CompileFailure{where + ": duplicate parameter '" + param + "'"};
                }
            }
            out.fns.push_back(std::move(fn));
        } else {
            throw CompileFailure{where + ": unknown statement"};
        }
    }
    return out;
}

std::vector<std::pair<std::size_t, std::string>> number_lines(const std::vector<std::string>& lines,
                                                              std::size_t first = 1) {
    std::vector<std::pair<std::size_t, std::string>> out;
    out.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        out.emplace_back(first + i, lines[i]);
    }
    return out;
}

/// Every variable must be in `vars` (or a global) and every call must name a
/// function of `scope` with matching arity.
void check_expr(const Expr& e, const std::set<std::string>& vars, const Scope& scope, const std::string& where) {
    switch (e.kind) {
    case Expr::Kind::Num:
        return;
    case Expr::Kind::Var:
        if (!vars.contains(e.name) && !(scope.globals && scope.globals->contains(e.name))) {
            throw CompileFailure{where + ": unresolved name '" + e.name + "'"};
        }
        return;
    case Expr::Kind::Call: {
        const auto it = scope.fns.find(e.name);
        if (it == scope.fns.end()) {
            throw CompileFailure{where + ": unresolved function '" + e.name + "'"};
        }
        if (it->second->params.size() != e.kids.size()) {
            throw CompileFailure{where + ": '" + e.name + "' takes " + std::to_string(it->second->params.size()) +
                                 " arguments, " + std::to_string(e.kids.size()) + " given"};
        }
        break;
    }
    default:
        break;
    }
    for (const auto& k : e.kids) {
        check_expr(k, vars, scope, where);
    }
}

void check_function(const Function& fn) {
    const std::set<std::string> vars(fn.params.begin(), fn.params.end());
    if (fn.body) {
        check_expr(*fn.body, vars, *fn.scope, fn.where);
    }
    for (const auto& c : fn.cases) {
        if (c.cond) {
            check_expr(*c.cond, vars, *fn.scope, fn.where);
        }
        check_expr(c.value, vars, *fn.scope, fn.where);
    }
}

void add_function(Scope& scope, const Function* fn, const std::string& where) {
    const auto [it, inserted] = scope.fns.emplace(fn->name, fn);
    if (!inserted && it->second != fn) {
        throw CompileFailure{where + ": '" + fn->name + "' is defined twice"};
    }
}

// ---------------------------------------------------------------------------
// evaluation

struct Frame {
    const Function* fn = nullptr;  // null at top level
    const std::vector<std::int64_t>* args = nullptr;
    const Scope* scope = nullptr;
};

class Evaluator {
public:
    explicit Evaluator(const Options& options) : options_(options) {}

    std::int64_t eval(const Expr& e, const Frame& f) {
        if (++steps_ > options_.step_budget) {
            throw OutOfSteps{};
        }
        switch (e.kind) {
        case Expr::Kind::Num:
            return e.value;
        case Expr::Kind::Var:
            return lookup(e.name, f);
        case Expr::Kind::Neg: {
            const auto v = eval(e.kids[0], f);
            std::int64_t r = 0;
            if (__builtin_sub_overflow(std::int64_t{0}, v, &r)) {
                throw RuntimeFailure{"integer overflow"};
            }
            return r;
        }
        case Expr::Kind::Bin:
            return binary(e.name, eval(e.kids[0], f), eval(e.kids[1], f));
        case Expr::Kind::Call: {
            std::vector<std::int64_t> args;
            args.reserve(e.kids.size());
            for (const auto& k : e.kids) {
                args.push_back(eval(k, f));
            }
            return call(*f.scope->fns.at(e.name), args);
        }
        }
        return 0;
    }

    std::int64_t call(const Function& fn, const std::vector<std::int64_t>& args) {
        if (++depth_ > options_.max_depth) {
            throw RuntimeFailure{"recursion too deep in '" + fn.name + "'"};
        }
        const Frame frame{&fn, &args, fn.scope};
        std::int64_t result = 0;
        if (fn.body) {
            result = eval(*fn.body, frame);
        } else {
            bool matched = false;
            for (const auto& c : fn.cases) {
                if (!c.cond || eval(*c.cond, frame) != 0) {
                    result = eval(c.value, frame);
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                throw RuntimeFailure{"no case of '" + fn.name + "' matches"};
            }
        }
        --depth_;
        return result;
    }

private:
    static std::int64_t lookup(const std::string& name, const Frame& f) {
        if (f.fn) {
            for (std::size_t i = 0; i < f.fn->params.size(); ++i) {
                if (f.fn->params[i] == name) {
                    return (*f.args)[i];
                }
            }
        }
        const auto it = f.scope->globals->find(name);
        if (it == f.scope->globals->end()) {
            throw RuntimeFailure{"'" + name + "' used before it is defined"};
        }
        return it->second;
    }

    static std::int64_t binary(const std::string& op, std::int64_t a, std::int64_t b) {
        std::int64_t r = 0;
        if (op == "+") {
            if (__builtin_add_overflow(a, b, &r)) {
                throw RuntimeFailure{"integer overflow"};
            }
            return r;
        }
        if (op == "-") {
            if (__builtin_sub_overflow(a, b, &r)) {
                throw RuntimeFailure{"integer overflow"};
            }
            return r;
        }
        if (op == "*") {
            if (__builtin_mul_overflow(a, b, &r)) {
                throw RuntimeFailure{"integer overflow"};
            }
            return r;
        }
        if (op == "/" || op == "%") {
            if (b == 0) {
                throw RuntimeFailure{"division by zero"};
            }
            if (a == INT64_MIN && b == -1) {
                throw RuntimeFailure{"integer overflow"};
            }
            return op == "/" ? a / b : a % b;
        }
        if (op == "==") return a == b;
        if (op == "!=") return a != b;
        if (op == "<") return a < b;
        if (op == "<=") return a <= b;
        if (op == ">") return a > b;
        return a >= b;
    }

    const Options& options_;
    std::uint64_t steps_ = 0;
    std::size_t depth_ = 0;
};

struct Module {
    std::string name;
    Statements stmts;
    Scope scope;
};

}  // namespace

struct Program::Impl {
    Options options;
    std::map<std::string, Module> modules;
    std::optional<std::string> source_error;
    transplant::TestSuiteModel model;
    std::optional<std::string> model_error;

    Impl(const FileTree& tree, Options opts) : options(std::move(opts)) {
        load_sources(tree);
        try {
            model = transplant::build_suite_model(tree, {transplant::ExtractorConfig::Kind::Annotation,
                                                         options.test_glob, {}});
        } catch (const Error& e) {
            model_error = e.what();
        }
    }

    void load_sources(const FileTree& tree) {
        try {
            for (const auto& [path, content] : tree) {
                if (!path.ends_with(".mf") || !glob_match(options.source_glob, path) ||
                    glob_match(options.test_glob, path)) {
                    continue;
                }
                auto stmts = parse_statements(path, number_lines(split_lines(content).lines));
                if (!stmts.module) {
                    throw CompileFailure{path + ": missing module declaration"};
                }
                if (!stmts.lets.empty() || !stmts.asserts.empty()) {
                    throw CompileFailure{path + ": only functions and imports may appear in a module"};
                }
                const std::string name = *stmts.module;
                if (modules.contains(name)) {
                    throw CompileFailure{path + ": module '" + name + "' is declared twice"};
                }
                modules[name] = Module{name, std::move(stmts), {}};
            }
            for (auto& [name, mod] : modules) {
                for (const auto& fn : mod.stmts.fns) {
                    add_function(mod.scope, fn.get(), fn->where);
                    fn->scope = &mod.scope;
                }
            }
            for (auto& [name, mod] : modules) {
                for (const auto& imp : mod.stmts.imports) {
                    const auto it = modules.find(imp);
                    if (it == modules.end()) {
                        throw CompileFailure{"module " + name + ": unknown module '" + imp + "'"};
                    }
                    for (const auto& fn : it->second.stmts.fns) {
                        add_function(mod.scope, fn.get(), "module " + name);
                    }
                }
            }
            for (const auto& [name, mod] : modules) {
                for (const auto& fn : mod.stmts.fns) {
                    check_function(*fn);
                }
            }
        } catch (const CompileFailure& e) {
            source_error = e.message;
        }
    }

    Result run(std::string_view test_id) const {
        const auto compile_error = [](const std::string& msg) {
            return Result{TestStatus::CompileError, "compile error: " + msg + "\n"};
        };
        if (source_error) {
            return compile_error(*source_error);
        }
        if (model_error) {
            return compile_error(*model_error);
        }
        const auto* unit = model.find(test_id);
        if (unit == nullptr || unit->kind != transplant::UnitKind::Test) {
            return compile_error("no test named '" + std::string(test_id) + "'");
        }

        std::vector<transplant::TestUnit> closure;
        try {
            closure = transplant::extract_closure(model, {std::string(test_id)});
        } catch (const Error& e) {
            return compile_error(e.what());
        }

        std::vector<Statements> parsed;
        std::map<std::string, std::int64_t> globals;
        Scope scope;
        scope.globals = &globals;
        std::vector<const Let*> lets;
        const std::vector<Assert>* asserts = nullptr;
        try {
            parsed.reserve(closure.size());
            for (const auto& u : closure) {
                // Line numbers are relative to the unit; the marker is line 1.
                std::vector<std::string> lines(u.body.begin() + (u.body.empty() ? 0 : 1), u.body.end());
                parsed.push_back(parse_statements(u.file + "#" + u.unit_id, number_lines(lines, 2)));
                auto& st = parsed.back();
                if (st.module) {
                    throw CompileFailure{u.file + ": module declaration inside a test unit"};
                }
                if (!st.asserts.empty() && u.unit_id != test_id) {
                    if (u.kind != transplant::UnitKind::Test) {
                        throw CompileFailure{u.file + "#" + u.unit_id + ": assert outside a test"};
                    }
                }
                if (u.unit_id == test_id) {
                    asserts = &st.asserts;
                }
            }
            std::set<std::string> imported;
            for (const auto& st : parsed) {
                for (const auto& imp : st.imports) {
                    if (!imported.insert(imp).second) {
                        continue;
                    }
                    const auto it = modules.find(imp);
                    if (it == modules.end()) {
                        throw CompileFailure{"unknown module '" + imp + "'"};
                    }
                    for (const auto& fn : it->second.stmts.fns) {
                        add_function(scope, fn.get(), "import " + imp);
                    }
                }
            }
            for (auto& st : parsed) {
                for (auto& fn : st.fns) {
                    add_function(scope, fn.get(), fn->where);
                    fn->scope = &scope;
                }
                for (const auto& let : st.lets) {
                    lets.push_back(&let);
                }
            }
            // Names are checked in load order: a fixture sees earlier fixtures.
            std::set<std::string> defined;
            for (const auto* let : lets) {
                check_expr(let->value, defined, scope, let->where);
                if (!defined.insert(let->name).second || scope.fns.contains(let->name)) {
                    throw CompileFailure{let->where + ": '" + let->name + "' is defined twice"};
                }
            }
            Scope fn_check = scope;
            std::map<std::string, std::int64_t> names;
            for (const auto& n : defined) {
                names.emplace(n, 0);
            }
            fn_check.globals = &names;
            for (const auto& st : parsed) {
                for (const auto& fn : st.fns) {
                    const std::set<std::string> vars(fn->params.begin(), fn->params.end());
                    if (fn->body) {
                        check_expr(*fn->body, vars, fn_check, fn->where);
                    }
                    for (const auto& c : fn->cases) {
                        if (c.cond) {
                            check_expr(*c.cond, vars, fn_check, fn->where);
                        }
                        check_expr(c.value, vars, fn_check, fn->where);
                    }
                }
            }
            for (const auto& a : *asserts) {
                check_expr(a.expr, defined, scope, unit->file + "#" + unit->unit_id);
            }
        } catch (const CompileFailure& e) {
            return compile_error(e.message);
        }

        Evaluator ev(options);
        const Frame top{nullptr, nullptr, &scope};
        try {
            for (const auto* let : lets) {
                globals[let->name] = ev.eval(let->value, top);
            }
            for (const auto& a : *asserts) {
                if (a.expr.kind == Expr::Kind::Bin && a.expr.name == "==") {
                    const auto actual = ev.eval(a.expr.kids[0], top);
                    const auto expected = ev.eval(a.expr.kids[1], top);
                    if (actual != expected) {
                        return {TestStatus::Fail, "assertion failed: " + a.text + "\nexpected: " +
                                                      std::to_string(expected) + "\nactual: " + std::to_string(actual) +
                                                      "\n"};
                    }
                } else if (ev.eval(a.expr, top) == 0) {
                    return {TestStatus::Fail, "assertion failed: " + a.text + "\nexpected: nonzero\nactual: 0\n"};
                }
            }
        } catch (const RuntimeFailure& e) {
            return {TestStatus::RuntimeError, "runtime error: " + e.message + "\n"};
        } catch (const OutOfSteps&) {
            return {TestStatus::Timeout, "timeout: step budget of " + std::to_string(options.step_budget) +
                                             " exhausted\n"};
        }
        return {TestStatus::Pass, ""};
    }
};

Program::Program(const FileTree& tree, Options options) : impl_(std::make_unique<Impl>(tree, std::move(options))) {}
Program::~Program() = default;
Program::Program(Program&&) noexcept = default;
Program& Program::operator=(Program&&) noexcept = default;

Result Program::run(std::string_view test_id) const {
    return impl_->run(test_id);
}

Result run_test(const FileTree& tree, std::string_view test_id, const Options& options) {
    return Program(tree, options).run(test_id);
}

}  // namespace mfmine::builtin
