#include "fusesim/ria.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>

namespace fusesim {
namespace ria {

namespace {

// Basis terms are "sym", "floor(sym/lit)" or "sym%lit"; recover the symbol.
std::string base_symbol(const std::string& term) {
    std::string s = term;
    if (s.rfind("floor(", 0) == 0) s = s.substr(6);
    std::string out;
    for (char ch : s) {
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_' ||
            (!out.empty() && std::isdigit(static_cast<unsigned char>(ch))))
            out += ch;
        else
            break;
    }
    return out;
}

}  // namespace

std::vector<std::string> IndexExpr::free_symbols() const {
    std::set<std::string> syms;
    for (const auto& [term, coeff] : terms)
        if (coeff != 0) syms.insert(base_symbol(term));
    return {syms.begin(), syms.end()};
}

std::string IndexExpr::str() const {
    std::string out;
    for (const auto& [term, coeff] : terms) {
        if (coeff == 0) continue;
        if (!out.empty() && coeff > 0) out += "+";
        if (coeff == -1)
            out += "-";
        else if (coeff != 1)
            out += std::to_string(coeff) + "*";
        out += term;
    }
    if (constant != 0 || out.empty()) {
        if (!out.empty() && constant > 0) out += "+";
        if (constant != 0 || out.empty()) out += std::to_string(constant);
    }
    return out;
}

IndexExpr operator+(const IndexExpr& a, const IndexExpr& b) {
    IndexExpr r = a;
    r.constant += b.constant;
    for (const auto& [t, c] : b.terms) {
        r.terms[t] += c;
        if (r.terms[t] == 0) r.terms.erase(t);
    }
    return r;
}

IndexExpr operator-(const IndexExpr& a, const IndexExpr& b) {
    IndexExpr neg;
    neg.constant = -b.constant;
    for (const auto& [t, c] : b.terms) neg.terms[t] = -c;
    return a + neg;
}

std::string TermOffset::str() const {
    if (constant) {
        std::string out = "[";
        for (size_t i = 0; i < offset.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(offset[i]);
        }
        return out + "]";
    }
    std::string out = "non-constant (depends on ";
    for (size_t i = 0; i < depends_on.size(); ++i) {
        if (i) out += ", ";
        out += depends_on[i];
    }
    return out + ")";
}

OffsetAnalysis analyze_offsets(const RecurrenceSystem& sys) {
    OffsetAnalysis out;
    for (size_t r = 0; r < sys.relations.size(); ++r) {
        const Relation& rel = sys.relations[r];
        std::vector<TermOffset> offs;
        for (const VarRef& ref : rel.rhs) {
            auto decl = sys.variables.find(ref.var);
            size_t arity = decl != sys.variables.end() ? static_cast<size_t>(decl->second)
                                                       : ref.indices.size();
            if (ref.indices.size() != arity || ref.indices.size() != rel.lhs.indices.size())
                throw std::invalid_argument("relation " + std::to_string(r + 1) + ": reference to " +
                                            ref.var + " has arity " + std::to_string(ref.indices.size()) +
                                            ", expected " + std::to_string(rel.lhs.indices.size()));
            TermOffset to;
            to.var = ref.var;
            to.constant = true;
            std::set<std::string> deps;
            for (size_t d = 0; d < ref.indices.size(); ++d) {
                IndexExpr diff = ref.indices[d] - rel.lhs.indices[d];
                if (diff.is_constant()) {
                    to.offset.push_back(diff.constant);
                } else {
                    to.constant = false;
                    to.offset.push_back(0);
                    for (const std::string& s : diff.free_symbols()) deps.insert(s);
                }
            }
            to.depends_on.assign(deps.begin(), deps.end());
            offs.push_back(std::move(to));
        }
        out.per_relation.push_back(std::move(offs));
    }
    return out;
}

Classification classify(const RecurrenceSystem& sys) {
    Classification cls;
    std::map<std::string, int> defs;
    for (const Relation& rel : sys.relations) ++defs[rel.lhs.var];
    for (const auto& [var, n] : defs)
        if (n > 1)
            cls.reasons.push_back("variable " + var + " is defined by " + std::to_string(n) +
                                  " relations (single assignment violated)");
    OffsetAnalysis oa = analyze_offsets(sys);
    for (size_t r = 0; r < oa.per_relation.size(); ++r)
        for (const TermOffset& to : oa.per_relation[r])
            if (!to.constant) {
                std::string deps;
                for (size_t i = 0; i < to.depends_on.size(); ++i)
                    deps += (i ? ", " : "") + to.depends_on[i];
                cls.reasons.push_back("offset of " + to.var + " in relation " +
                                      std::to_string(r + 1) + " depends on " + deps);
            }
    cls.is_ria = cls.reasons.empty();
    return cls;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

struct Parser {
    const std::string& line;
    size_t pos = 0;
    int lineno;

    Parser(const std::string& l, int n) : line(l), lineno(n) {}

    [[noreturn]] void fail(const std::string& msg) {
        throw std::runtime_error("line " + std::to_string(lineno) + ": " + msg +
                                 " (at column " + std::to_string(pos + 1) + ")");
    }
    void skip_ws() {
        while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < line.size() && line[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool peek(char c) {
        skip_ws();
        return pos < line.size() && line[pos] == c;
    }
    bool at_end() {
        skip_ws();
        return pos >= line.size();
    }
    std::string ident() {
        skip_ws();
        size_t start = pos;
        while (pos < line.size() &&
               (std::isalnum(static_cast<unsigned char>(line[pos])) || line[pos] == '_' ||
                line[pos] == '\''))
            ++pos;
        if (pos == start) fail("expected identifier");
        return line.substr(start, pos - start);
    }
    int integer() {
        skip_ws();
        size_t start = pos;
        if (pos < line.size() && (line[pos] == '-' || line[pos] == '+')) ++pos;
        while (pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]))) ++pos;
        if (pos == start || (pos == start + 1 && !std::isdigit(static_cast<unsigned char>(line[start]))))
            fail("expected integer");
        return std::stoi(line.substr(start, pos - start));
    }
    bool next_is_digit() {
        skip_ws();
        return pos < line.size() && std::isdigit(static_cast<unsigned char>(line[pos]));
    }

    // factor := IDENT | floor(IDENT/INT), optionally followed by %INT
    std::string factor() {
        std::string id = ident();
        std::string term;
        if (id == "floor") {
            expect('(');
            std::string sym = ident();
            expect('/');
            int lit = integer();
            expect(')');
            term = "floor(" + sym + "/" + std::to_string(lit) + ")";
        } else {
            term = id;
        }
        if (eat('%')) {
            if (term != base_symbol(term)) fail("'%' only applies to a plain index symbol");
            int lit = integer();
            term = term + "%" + std::to_string(lit);
        }
        return term;
    }

    // expr := [sign] term ((+|-) term)*; term := INT ['*' factor] | factor
    IndexExpr expr() {
        IndexExpr e;
        int sign = 1;
        if (eat('-')) sign = -1;
        else eat('+');
        while (true) {
            if (next_is_digit()) {
                int v = integer();
                if (eat('*'))
                    e.terms[factor()] += sign * v;
                else
                    e.constant += sign * v;
            } else {
                e.terms[factor()] += sign;
            }
            if (eat('+')) sign = 1;
            else if (eat('-')) sign = -1;
            else break;
        }
        for (auto it = e.terms.begin(); it != e.terms.end();)
            it = it->second == 0 ? e.terms.erase(it) : std::next(it);
        return e;
    }

    VarRef ref() {
        VarRef r;
        r.var = ident();
        expect('[');
        r.indices.push_back(expr());
        while (eat(',')) r.indices.push_back(expr());
        expect(']');
        return r;
    }
};

void note_variable(RecurrenceSystem& sys, const VarRef& ref, int lineno) {
    auto [it, inserted] = sys.variables.emplace(ref.var, static_cast<int>(ref.indices.size()));
    if (!inserted && it->second != static_cast<int>(ref.indices.size()))
        throw std::runtime_error("line " + std::to_string(lineno) + ": variable " + ref.var +
                                 " used with arity " + std::to_string(ref.indices.size()) +
                                 " but declared with arity " + std::to_string(it->second));
}

void note_symbols(RecurrenceSystem& sys, const VarRef& ref) {
    for (const IndexExpr& e : ref.indices)
        for (const std::string& s : e.free_symbols())
            if (std::find(sys.index_symbols.begin(), sys.index_symbols.end(), s) ==
                sys.index_symbols.end())
                sys.index_symbols.push_back(s);
}

}  // namespace

RecurrenceSystem parse_system(const std::string& text, const std::string& name) {
    RecurrenceSystem sys;
    sys.name = name;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw.substr(0, raw.find('#'));
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Parser p(line, lineno);
        Relation rel;
        rel.lhs = p.ref();
        p.expect('=');
        do {
            rel.rhs.push_back(p.ref());
            while (p.eat('*')) rel.rhs.push_back(p.ref());
        } while (p.eat('+'));
        if (!p.at_end()) p.fail("unexpected trailing input");
        note_variable(sys, rel.lhs, lineno);
        note_symbols(sys, rel.lhs);
        for (const VarRef& r : rel.rhs) {
            note_variable(sys, r, lineno);
            note_symbols(sys, r);
        }
        sys.relations.push_back(std::move(rel));
    }
    if (sys.relations.empty()) throw std::runtime_error("line 1: no relations found");
    return sys;
}

RecurrenceSystem rename_symbols(const RecurrenceSystem& sys,
                                const std::map<std::string, std::string>& mapping) {
    auto rename_term = [&](const std::string& term) {
        std::string sym = base_symbol(term);
        auto it = mapping.find(sym);
        if (it == mapping.end()) return term;
        std::string out = term;
        size_t at = out.find(sym);
        out.replace(at, sym.size(), it->second);
        return out;
    };
    RecurrenceSystem out = sys;
    for (std::string& s : out.index_symbols) {
        auto it = mapping.find(s);
        if (it != mapping.end()) s = it->second;
    }
    for (Relation& rel : out.relations) {
        auto fix_ref = [&](VarRef& r) {
            for (IndexExpr& e : r.indices) {
                std::map<std::string, int> nt;
                for (const auto& [t, c] : e.terms) nt[rename_term(t)] += c;
                e.terms = std::move(nt);
            }
        };
        fix_ref(rel.lhs);
        for (VarRef& r : rel.rhs) fix_ref(r);
    }
    return out;
}

RecurrenceSystem builtin_matmul() {
    return parse_system(
        "C[i,j,k] = C[i,j,k-1] + A[i,j,k]*B[i,j,k]\n"
        "A[i,j,k] = A[i,j-1,k]\n"
        "B[i,j,k] = B[i-1,j,k]\n",
        "matmul");
}

RecurrenceSystem builtin_conv2d_direct() {
    // Direct 2D convolution with a 3x3 filter: the input reference walks the
    // receptive field, so its offset varies with the accumulation index k.
    return parse_system(
        "O[i,j,k] = O[i,j,k-1] + A[i+floor(k/3),j+k%3,k]*W[i,j,k]\n"
        "W[i,j,k] = W[i-1,j,k]\n",
        "conv2d");
}

RecurrenceSystem builtin_conv1d() {
    return parse_system(
        "Y[j,k] = Y[j,k-1] + X[j,k]*W[j,k]\n"
        "X[j,k] = X[j+1,k-1]\n"
        "W[j,k] = W[j-1,k]\n",
        "conv1d");
}

RecurrenceSystem builtin_conv2d_im2col() {
    // After im2col the convolution is matmul-shaped over the unrolled matrix.
    return parse_system(
        "P[i,j,k] = P[i,j,k-1] + Au[i,j,k]*F[i,j,k]\n"
        "Au[i,j,k] = Au[i,j-1,k]\n"
        "F[i,j,k] = F[i-1,j,k]\n",
        "conv2d-im2col");
}

RecurrenceSystem builtin(const std::string& name) {
    if (name == "matmul") return builtin_matmul();
    if (name == "conv2d") return builtin_conv2d_direct();
    if (name == "conv1d") return builtin_conv1d();
    if (name == "conv2d-im2col") return builtin_conv2d_im2col();
    throw std::invalid_argument("unknown builtin recurrence system '" + name +
                                "' (known: matmul, conv2d, conv1d, conv2d-im2col)");
}

std::vector<std::string> builtin_names() {
    return {"matmul", "conv2d", "conv1d", "conv2d-im2col"};
}

}  // namespace ria
}  // namespace fusesim
