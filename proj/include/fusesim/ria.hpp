#pragma once

#include <map>
#include <string>
#include <vector>

namespace fusesim {
namespace ria {

/// Integer index expression: constant + sum of coeff * basis term. A basis
/// term is either a plain index symbol ("k") or an opaque atom built from one
/// symbol and a literal ("floor(k/3)", "k%3"). Atoms are never expanded;
/// anything that still carries a basis term after subtraction is non-constant.
struct IndexExpr {
    int constant = 0;
    std::map<std::string, int> terms;  // basis term -> coefficient

    IndexExpr() = default;
    explicit IndexExpr(int c) : constant(c) {}

    bool is_constant() const { return terms.empty(); }
    std::vector<std::string> free_symbols() const;  // underlying index symbols
    std::string str() const;
};

IndexExpr operator+(const IndexExpr& a, const IndexExpr& b);
IndexExpr operator-(const IndexExpr& a, const IndexExpr& b);

struct VarRef {
    std::string var;
    std::vector<IndexExpr> indices;
};

struct Relation {
    VarRef lhs;
    std::vector<VarRef> rhs;  // one entry per variable reference on the RHS
};

struct RecurrenceSystem {
    std::string name;
    std::vector<std::string> index_symbols;  // ordered, e.g. i, j, k
    std::map<std::string, int> variables;    // variable -> index arity
    std::vector<Relation> relations;
};

/// One RHS reference's offset, computed as rhs indices minus lhs indices
/// (matmul's C[i,j,k-1] reads the k-1 plane, offset [0,0,-1]).
struct TermOffset {
    std::string var;
    bool constant = false;
    std::vector<int> offset;                // valid when constant
    std::vector<std::string> depends_on;    // index symbols, when not constant
    std::string str() const;
};

struct OffsetAnalysis {
    std::vector<std::vector<TermOffset>> per_relation;  // parallel to relations/rhs
};

struct Classification {
    bool is_ria = false;
    std::vector<std::string> reasons;  // empty iff is_ria
};

OffsetAnalysis analyze_offsets(const RecurrenceSystem& sys);

/// RIA iff every variable is defined by at most one relation and every RHS
/// offset is a constant vector. Decides the given encoding only; it makes no
/// claim about other encodings of the same computation.
Classification classify(const RecurrenceSystem& sys);

RecurrenceSystem builtin_matmul();
RecurrenceSystem builtin_conv2d_direct();
RecurrenceSystem builtin_conv1d();
RecurrenceSystem builtin_conv2d_im2col();
RecurrenceSystem builtin(const std::string& name);
std::vector<std::string> builtin_names();

/// Rename index symbols everywhere (classification must be invariant).
RecurrenceSystem rename_symbols(const RecurrenceSystem& sys,
                                const std::map<std::string, std::string>& mapping);

/// Text format, one relation per line:
///   C[i,j,k] = C[i,j,k-1] + A[i,j,k]*B[i,j,k]
/// Index expressions: sums of optionally signed terms over symbols, integer
/// literals, floor(sym/lit) and sym%lit. '#' starts a comment. Parse errors
/// carry the 1-based line number.
RecurrenceSystem parse_system(const std::string& text, const std::string& name = "user");

}  // namespace ria
}  // namespace fusesim
