#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qtomo {

inline int hamming_distance(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

// Complete graph over distinct basis indices of an n-bit space, with edge
// weights given by Hamming distance.
struct HammingGraph {
    int n = 0;
    std::vector<std::uint64_t> vertices;  // sorted, distinct

    HammingGraph(int bits, std::vector<std::uint64_t> verts) : n(bits), vertices(std::move(verts)) {
        if (bits < 1 || bits > 63) throw std::invalid_argument("HammingGraph: bad bit count");
        if (vertices.empty()) throw std::invalid_argument("HammingGraph: no vertices");
        std::sort(vertices.begin(), vertices.end());
        vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
        for (std::uint64_t v : vertices)
            if (v >> bits) throw std::out_of_range("HammingGraph: vertex outside index space");
    }
};

struct TreeEdge {
    std::uint64_t u = 0, v = 0;  // u < v
    int weight = 0;
};

struct SpanningTree {
    std::vector<TreeEdge> edges;
    std::map<int, int> weight_hist;  // weight j -> number of edges p_j

    long long total_weight() const {
        long long w = 0;
        for (const TreeEdge& e : edges) w += e.weight;
        return w;
    }
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(std::size_t k) : parent(k) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

}  // namespace detail

// Kruskal over the complete Hamming graph. Edges are taken in ascending
// (weight, min endpoint, max endpoint) order, which fixes every tie and
// makes the returned tree deterministic.
inline SpanningTree build_mst(const HammingGraph& graph) {
    const std::vector<std::uint64_t>& verts = graph.vertices;
    const std::size_t k = verts.size();
    if (k == 0) throw std::invalid_argument("build_mst: empty vertex set");

    struct CandEdge {
        int weight;
        std::uint32_t a, b;  // positions in verts, a < b
    };
    std::vector<CandEdge> cand;
    cand.reserve(k * (k - 1) / 2);
    for (std::uint32_t a = 0; a < k; ++a)
        for (std::uint32_t b = a + 1; b < k; ++b)
            cand.push_back({hamming_distance(verts[a], verts[b]), a, b});
    std::sort(cand.begin(), cand.end(), [&](const CandEdge& x, const CandEdge& y) {
        if (x.weight != y.weight) return x.weight < y.weight;
        if (verts[x.a] != verts[y.a]) return verts[x.a] < verts[y.a];
        return verts[x.b] < verts[y.b];
    });

    SpanningTree tree;
    detail::UnionFind uf(k);
    for (const CandEdge& e : cand) {
        if (tree.edges.size() == k - 1) break;
        if (uf.unite(static_cast<int>(e.a), static_cast<int>(e.b))) {
            tree.edges.push_back({verts[e.a], verts[e.b], e.weight});
            ++tree.weight_hist[e.weight];
        }
    }
    return tree;
}

// Upper bound on CNOTs used by the pair-measurement scheme:
// 2 * sum_{j >= 2} (j - 1) * p_j over the tree's weight histogram.
inline long long cnot_upper_bound(const SpanningTree& tree) {
    long long bound = 0;
    for (const auto& [weight, count] : tree.weight_hist)
        if (weight >= 2) bound += 2ll * (weight - 1) * count;
    return bound;
}

// Exhaustively verifies that every vertex set with more than 2^n - n
// elements has an MST of total weight k - 1 (all edges weight 1).
// Only n in {2, 3, 4} is supported; larger n is refused rather than
// silently truncated.
inline bool theorem_a_check(int n) {
    if (n < 2 || n > 4) throw std::domain_error("theorem_a_check: n must be 2, 3, or 4");
    const std::uint64_t space = std::uint64_t{1} << n;
    const std::uint64_t subsets = std::uint64_t{1} << space;
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
        const int k = std::popcount(mask);
        if (k <= static_cast<int>(space) - n) continue;
        std::vector<std::uint64_t> verts;
        for (std::uint64_t i = 0; i < space; ++i)
            if (mask & (std::uint64_t{1} << i)) verts.push_back(i);
        if (build_mst(HammingGraph(n, verts)).total_weight() != k - 1) return false;
    }
    return true;
}

// Worst-case vertex set for k entries over n bits, valid when n = k*q + r
// with 0 <= r < q: vertices l_1..l_{k-1} occupy disjoint q-bit blocks and
// l_k occupies the remaining q + r high bits, so pairwise distances are 2q
// except against l_k (2q + r) and the MST weight is 2q(k-1) + r.
struct AdversarialSet {
    std::vector<std::uint64_t> vertices;
    int q = 0, r = 0;
    long long expected_mst_weight = 0;
};

inline AdversarialSet adversarial_vertex_set(int n, int k) {
    if (k < 3 || k > n || n > 63)
        throw std::invalid_argument("adversarial_vertex_set: need 3 <= k <= n <= 63");
    const int q = n / k, r = n % k;
    if (r >= q)
        throw std::invalid_argument("adversarial_vertex_set: n = kq + r with r < q has no solution");
    AdversarialSet set;
    set.q = q;
    set.r = r;
    set.expected_mst_weight = 2ll * q * (k - 1) + r;
    const std::uint64_t block = (std::uint64_t{1} << q) - 1;
    for (int j = 0; j < k - 1; ++j) set.vertices.push_back(block << (j * q));
    const std::uint64_t tail = (std::uint64_t{1} << (q + r)) - 1;
    set.vertices.push_back(tail << ((k - 1) * q));
    return set;
}

// Sphere-packing limit on codewords: floor(2^n / sum_{j<=t} C(n, j)) with
// t = floor((d - 1) / 2).
inline std::uint64_t hamming_bound(int n, int d) {
    if (n < 1 || n > 62 || d < 1 || d > n) throw std::invalid_argument("hamming_bound: bad n or d");
    const int t = (d - 1) / 2;
    std::uint64_t ball = 0, binom = 1;
    for (int j = 0; j <= t; ++j) {
        ball += binom;
        binom = binom * (n - j) / (j + 1);
    }
    return (std::uint64_t{1} << n) / ball;
}

// Connected components after discarding tree edges heavier than max_weight.
// Components come back sorted, each as a sorted vertex list.
inline std::vector<std::vector<std::uint64_t>> forest_partition(const HammingGraph& graph,
                                                                const SpanningTree& tree,
                                                                int max_weight) {
    const std::vector<std::uint64_t>& verts = graph.vertices;
    detail::UnionFind uf(verts.size());
    auto position = [&](std::uint64_t v) {
        return static_cast<int>(std::lower_bound(verts.begin(), verts.end(), v) - verts.begin());
    };
    for (const TreeEdge& e : tree.edges)
        if (e.weight <= max_weight) uf.unite(position(e.u), position(e.v));
    std::map<int, std::vector<std::uint64_t>> groups;
    for (std::size_t i = 0; i < verts.size(); ++i)
        groups[uf.find(static_cast<int>(i))].push_back(verts[i]);
    std::vector<std::vector<std::uint64_t>> out;
    for (auto& [root, members] : groups) out.push_back(std::move(members));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace qtomo
