#include "qdtl/boolean.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qdtl {

BooleanFunction::BooleanFunction(int n_bits, std::vector<int> vals)
    : n(n_bits), values(std::move(vals)) {
    validate();
}

void BooleanFunction::validate() const {
    if (n < 1 || n > kMaxBits) {
        throw std::invalid_argument("BooleanFunction: n must be in [1, 20]");
    }
    if (values.size() != (std::size_t(1) << n)) {
        throw std::invalid_argument("BooleanFunction: table length must be 2^n");
    }
    for (int v : values) {
        if (v != 1 && v != -1) {
            throw std::invalid_argument("BooleanFunction: entries must be +-1");
        }
    }
}

int DecisionTree::leaf_count() const {
    int count = 0;
    for (const Node& node : nodes) {
        if (node.var < 0) ++count;
    }
    return count;
}

namespace {

void validate_subtree(const DecisionTree& tree, int idx, int n, std::uint32_t used) {
    if (idx < 0 || idx >= static_cast<int>(tree.nodes.size())) {
        throw std::invalid_argument("DecisionTree: child index out of range");
    }
    const DecisionTree::Node& node = tree.nodes[idx];
    if (node.var < 0) {
        if (node.label != 1 && node.label != -1) {
            throw std::invalid_argument("DecisionTree: leaf label must be +-1");
        }
        return;
    }
    if (node.var >= n) {
        throw std::invalid_argument("DecisionTree: variable index must be < n");
    }
    std::uint32_t bit = 1u << node.var;
    if (used & bit) {
        throw std::invalid_argument("DecisionTree: repeated variable on a path");
    }
    validate_subtree(tree, node.left, n, used | bit);
    validate_subtree(tree, node.right, n, used | bit);
}

}  // namespace

void DecisionTree::validate(int n) const {
    if (nodes.empty()) {
        throw std::invalid_argument("DecisionTree: empty");
    }
    validate_subtree(*this, root, n, 0);
}

int eval_tree(const DecisionTree& tree, std::uint32_t x, int n) {
    int idx = tree.root;
    for (;;) {
        const DecisionTree::Node& node = tree.nodes[idx];
        if (node.var < 0) return node.label;
        std::uint32_t bit = 1u << (n - 1 - node.var);
        idx = (x & bit) ? node.right : node.left;
    }
}

DecisionTree random_tree(int n, int t, Rng& rng) {
    if (n < 1 || n > kMaxBits) {
        throw std::invalid_argument("random_tree: n out of range");
    }
    if (t < 1 || static_cast<std::uint64_t>(t) > (std::uint64_t(1) << n)) {
        throw std::invalid_argument("random_tree: t must be in [1, 2^n]");
    }
    DecisionTree tree;
    tree.nodes.push_back({-1, -1, -1, rng.sign()});
    std::vector<int> leaf_ids = {0};
    std::vector<std::uint32_t> leaf_used = {0};  // variables on the leaf's path

    for (int grown = 1; grown < t; ++grown) {
        std::vector<int> splittable;
        for (std::size_t i = 0; i < leaf_ids.size(); ++i) {
            if (__builtin_popcount(leaf_used[i]) < n) splittable.push_back(static_cast<int>(i));
        }
        int pick = splittable[rng.uniform_below(splittable.size())];
        int node_id = leaf_ids[pick];
        std::uint32_t used = leaf_used[pick];

        std::vector<int> free_vars;
        for (int v = 0; v < n; ++v) {
            if (!(used & (1u << v))) free_vars.push_back(v);
        }
        int var = free_vars[rng.uniform_below(free_vars.size())];

        int left = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({-1, -1, -1, rng.sign()});
        int right = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({-1, -1, -1, rng.sign()});
        tree.nodes[node_id] = {var, left, right, 0};

        std::uint32_t child_used = used | (1u << var);
        leaf_ids[pick] = left;
        leaf_used[pick] = child_used;
        leaf_ids.push_back(right);
        leaf_used.push_back(child_used);
    }
    return tree;
}

BooleanFunction tree_to_function(const DecisionTree& tree, int n) {
    tree.validate(n);
    BooleanFunction f;
    f.n = n;
    f.values.resize(std::size_t(1) << n);
    for (std::uint32_t x = 0; x < f.size(); ++x) {
        f.values[x] = eval_tree(tree, x, n);
    }
    return f;
}

std::vector<double> wht_real(const std::vector<double>& table) {
    std::vector<double> a = table;
    std::size_t size = a.size();
    for (std::size_t half = 1; half < size; half <<= 1) {
        for (std::size_t block = 0; block < size; block += 2 * half) {
            for (std::size_t i = block; i < block + half; ++i) {
                double u = a[i];
                double v = a[i + half];
                a[i] = u + v;
                a[i + half] = u - v;
            }
        }
    }
    double scale = 1.0 / static_cast<double>(size);
    for (double& v : a) v *= scale;
    return a;
}

FourierSpectrum wht(const BooleanFunction& f) {
    std::vector<double> table(f.values.begin(), f.values.end());
    FourierSpectrum spec;
    spec.n = f.n;
    spec.coeffs = wht_real(table);
    return spec;
}

std::vector<double> wht_inverse(const FourierSpectrum& spec) {
    // The transform is an involution up to the 2^-n normalization.
    std::vector<double> a = spec.coeffs;
    std::size_t size = a.size();
    for (std::size_t half = 1; half < size; half <<= 1) {
        for (std::size_t block = 0; block < size; block += 2 * half) {
            for (std::size_t i = block; i < block + half; ++i) {
                double u = a[i];
                double v = a[i + half];
                a[i] = u + v;
                a[i + half] = u - v;
            }
        }
    }
    return a;
}

namespace {

double pairwise_square_sum(const std::vector<double>& coeffs, std::size_t lo, std::size_t len) {
    if (len == 1) {
        return coeffs[lo] * coeffs[lo];
    }
    std::size_t half = len / 2;
    return pairwise_square_sum(coeffs, lo, half) + pairwise_square_sum(coeffs, lo + half, half);
}

}  // namespace

double prefix_weight(const FourierSpectrum& spec, const Prefix& p) {
    if (p.len < 0 || p.len > spec.n) {
        throw std::invalid_argument("prefix_weight: prefix longer than n");
    }
    std::size_t len = std::size_t(1) << (spec.n - p.len);
    std::size_t lo = std::size_t(p.bits) << (spec.n - p.len);
    return pairwise_square_sum(spec.coeffs, lo, len);
}

double l1_norm(const FourierSpectrum& spec) {
    double sum = 0.0;
    for (double c : spec.coeffs) sum += std::abs(c);
    return sum;
}

BestParity best_parity(const FourierSpectrum& spec) {
    BestParity best;
    best.mask = 0;
    best.value = std::abs(spec.coeffs[0]);
    for (std::uint32_t s = 1; s < spec.size(); ++s) {
        double v = std::abs(spec.coeffs[s]);
        if (v > best.value) {
            best.value = v;
            best.mask = s;
        }
    }
    return best;
}

// --- serialization -----------------------------------------------------------

namespace {

void append_sexpr(const DecisionTree& tree, int idx, std::string& out) {
    const DecisionTree::Node& node = tree.nodes[idx];
    if (node.var < 0) {
        out += "(leaf ";
        out += (node.label > 0) ? "+1" : "-1";
        out += ")";
        return;
    }
    out += "(var ";
    out += std::to_string(node.var);
    out += " ";
    append_sexpr(tree, node.left, out);
    out += " ";
    append_sexpr(tree, node.right, out);
    out += ")";
}

struct SexprParser {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c) {
            throw std::invalid_argument("tree_from_sexpr: expected '" + std::string(1, c) + "'");
        }
        ++pos;
    }

    std::string token() {
        skip_ws();
        std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')') {
            ++pos;
        }
        if (start == pos) throw std::invalid_argument("tree_from_sexpr: missing token");
        return text.substr(start, pos - start);
    }

    int parse_node(DecisionTree& tree) {
        expect('(');
        std::string kind = token();
        int idx = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        if (kind == "leaf") {
            std::string label = token();
            if (label != "+1" && label != "1" && label != "-1") {
                throw std::invalid_argument("tree_from_sexpr: leaf label must be +-1");
            }
            tree.nodes[idx] = {-1, -1, -1, label == "-1" ? -1 : 1};
        } else if (kind == "var") {
            int var = std::stoi(token());
            int left = parse_node(tree);
            int right = parse_node(tree);
            tree.nodes[idx] = {var, left, right, 0};
        } else {
            throw std::invalid_argument("tree_from_sexpr: unknown node kind '" + kind + "'");
        }
        expect(')');
        return idx;
    }
};

}  // namespace

std::string tree_to_sexpr(const DecisionTree& tree) {
    std::string out;
    append_sexpr(tree, tree.root, out);
    return out;
}

DecisionTree tree_from_sexpr(const std::string& text) {
    DecisionTree tree;
    SexprParser parser{text};
    tree.root = parser.parse_node(tree);
    parser.skip_ws();
    if (parser.pos != text.size()) {
        throw std::invalid_argument("tree_from_sexpr: trailing input");
    }
    return tree;
}

void write_table_csv(std::ostream& out, const std::vector<int>& values) {
    out << "index,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << i << "," << values[i] << "\n";
    }
}

void write_table_csv(std::ostream& out, const std::vector<double>& values) {
    out << "index,value\n";
    char buf[40];
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
        out << i << "," << buf << "\n";
    }
}

std::vector<double> read_table_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("index,", 0) != 0) {
        throw std::invalid_argument("read_table_csv: missing header");
    }
    std::vector<double> values;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::invalid_argument("read_table_csv: malformed row");
        }
        std::size_t index = std::stoul(line.substr(0, comma));
        if (index != values.size()) {
            throw std::invalid_argument("read_table_csv: rows out of order");
        }
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    return values;
}

std::string mask_to_string(std::uint32_t mask, int n) {
    std::string out(n, '0');
    for (int i = 0; i < n; ++i) {
        if (mask & (1u << (n - 1 - i))) out[i] = '1';
    }
    return out;
}

}  // namespace qdtl
