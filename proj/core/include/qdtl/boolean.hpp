#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qdtl/rng.hpp"

namespace qdtl {

inline constexpr int kMaxBits = 20;

// Input/mask packing convention: variable x0 is the MOST significant bit of
// the n-bit index, so a prefix over x0..x_{s-1} selects a contiguous block of
// truth-table (and spectrum) indices. chi_S(x) = (-1)^{popcount(S & x)}.
inline int parity_eval(std::uint32_t mask, std::uint32_t x) {
    return (__builtin_popcount(mask & x) & 1) ? -1 : 1;
}

// Total Boolean function as a dense +-1 truth table of length 2^n.
struct BooleanFunction {
    int n = 0;
    std::vector<int> values;  // values[i] = f(x) for the input packed into i

    BooleanFunction() = default;
    BooleanFunction(int n_bits, std::vector<int> vals);

    std::uint32_t size() const { return 1u << n; }
    int operator()(std::uint32_t x) const { return values[x]; }

    void validate() const;  // throws std::invalid_argument on a broken table
};

// Binary decision tree with +-1 leaves, stored as a flat node array.
struct DecisionTree {
    struct Node {
        int var = -1;   // -1 for leaves
        int left = -1;  // child when x_var == 0
        int right = -1; // child when x_var == 1
        int label = 0;  // +-1 at leaves
    };

    std::vector<Node> nodes;  // nodes[0] is the root
    int root = 0;

    bool empty() const { return nodes.empty(); }
    int leaf_count() const;
    void validate(int n) const;  // index ranges, distinct vars per path
};

int eval_tree(const DecisionTree& tree, std::uint32_t x, int n);

// Exactly t leaves, distinct variables on every root-leaf path; grows by
// splitting a uniformly chosen splittable leaf. Deterministic given rng.
DecisionTree random_tree(int n, int t, Rng& rng);

BooleanFunction tree_to_function(const DecisionTree& tree, int n);

// Fourier coefficients indexed by the parity mask S (same packing as inputs).
struct FourierSpectrum {
    int n = 0;
    std::vector<double> coeffs;

    std::uint32_t size() const { return 1u << n; }
    double operator[](std::uint32_t s) const { return coeffs[s]; }
};

// Prefix over the first `len` variables, most significant bit first.
struct Prefix {
    std::uint32_t bits = 0;
    int len = 0;

    Prefix child(int b) const { return Prefix{(bits << 1) | std::uint32_t(b), len + 1}; }
    bool operator==(const Prefix&) const = default;
};

// coeffs[S] = 2^-n sum_x f(x) chi_S(x); fast in-place transform.
FourierSpectrum wht(const BooleanFunction& f);

// Same butterfly on an arbitrary real table (used for channel means and for
// bias-attenuated predictors).
std::vector<double> wht_real(const std::vector<double>& table);

// f(x) = sum_S coeffs[S] chi_S(x); exact inverse of wht.
std::vector<double> wht_inverse(const FourierSpectrum& spec);

// Sum of squared coefficients over all masks extending p. Summed pairwise, so
// prefix_weight(p) == prefix_weight(p0) + prefix_weight(p1) holds bit-exactly.
double prefix_weight(const FourierSpectrum& spec, const Prefix& p);

double l1_norm(const FourierSpectrum& spec);

struct BestParity {
    std::uint32_t mask = 0;
    double value = 0.0;  // max_S |coeffs[S]|
};

// Exhaustive argmax of |coeff|; ties broken toward the smallest mask.
BestParity best_parity(const FourierSpectrum& spec);

// --- serialization -----------------------------------------------------------

// S-expression form: (var i L R) / (leaf +-1), one tree per line.
std::string tree_to_sexpr(const DecisionTree& tree);
DecisionTree tree_from_sexpr(const std::string& text);

// Headered CSV "index,value".
void write_table_csv(std::ostream& out, const std::vector<int>& values);
void write_table_csv(std::ostream& out, const std::vector<double>& values);
std::vector<double> read_table_csv(std::istream& in);

std::string mask_to_string(std::uint32_t mask, int n);

}  // namespace qdtl
