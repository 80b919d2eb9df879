// Exact maximum-weight matching on general graphs, O(n^3).
//
// Dense blossom algorithm with vertex/blossom dual variables (Galil's
// primal-dual scheme).  Integer weights only, so complementary slackness is
// checked exactly and the result is optimal, not approximate.  The caller
// makes the matching perfect by shifting weights so that higher cardinality
// always dominates.

#include <pybind11/pybind11.h>
#include <pybind11/numpy.h>

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <vector>

namespace py = pybind11;

namespace {

using ll = long long;

struct Edge {
    int u = 0, v = 0;
    ll w = 0;  // doubled internally via e_delta; 0 marks a non-edge
};

// All arrays are 1-indexed; ids 1..n are vertices, n+1..n_x live blossoms.
struct Blossom {
    int n = 0, n_x = 0;
    std::vector<std::vector<Edge>> g;
    std::vector<ll> lab;
    std::vector<int> match, slack, st, pa, S, vis;
    std::vector<std::vector<int>> flower, flower_from;
    std::deque<int> q;
    int timestamp = 0;

    explicit Blossom(int n_) : n(n_) {
        int N = 2 * n + 2;
        g.assign(N, std::vector<Edge>(N));
        for (int u = 0; u < N; ++u)
            for (int v = 0; v < N; ++v) g[u][v] = Edge{u, v, 0};
        lab.assign(N, 0);
        match.assign(N, 0);
        slack.assign(N, 0);
        st.assign(N, 0);
        pa.assign(N, 0);
        S.assign(N, 0);
        vis.assign(N, 0);
        flower.assign(N, {});
        flower_from.assign(N, std::vector<int>(N, 0));
    }

    ll e_delta(const Edge &e) const { return lab[e.u] + lab[e.v] - 2 * e.w; }

    void update_slack(int u, int x) {
        if (!slack[x] || e_delta(g[u][x]) < e_delta(g[slack[x]][x])) slack[x] = u;
    }

    void set_slack(int x) {
        slack[x] = 0;
        for (int u = 1; u <= n; ++u)
            if (g[u][x].w > 0 && st[u] != x && S[st[u]] == 0) update_slack(u, x);
    }

    void q_push(int x) {
        if (x <= n) {
            q.push_back(x);
        } else {
            for (int i : flower[x]) q_push(i);
        }
    }

    void set_st(int x, int b) {
        st[x] = b;
        if (x > n)
            for (int i : flower[x]) set_st(i, b);
    }

    int get_pr(int b, int xr) {
        int pr = static_cast<int>(
            std::find(flower[b].begin(), flower[b].end(), xr) - flower[b].begin());
        if (pr % 2 == 1) {  // walk the stem the other way round
            std::reverse(flower[b].begin() + 1, flower[b].end());
            return static_cast<int>(flower[b].size()) - pr;
        }
        return pr;
    }

    void set_match(int u, int v) {
        match[u] = g[u][v].v;
        if (u > n) {
            Edge e = g[u][v];
            int xr = flower_from[u][e.u];
            int pr = get_pr(u, xr);
            for (int i = 0; i < pr; ++i) set_match(flower[u][i], flower[u][i ^ 1]);
            set_match(xr, v);
            std::rotate(flower[u].begin(), flower[u].begin() + pr, flower[u].end());
        }
    }

    void augment(int u, int v) {
        for (;;) {
            int xnv = st[match[u]];
            set_match(u, v);
            if (!xnv) return;
            set_match(xnv, st[pa[xnv]]);
            u = st[pa[xnv]];
            v = xnv;
        }
    }

    int get_lca(int u, int v) {
        for (++timestamp; u || v; std::swap(u, v)) {
            if (u == 0) continue;
            if (vis[u] == timestamp) return u;
            vis[u] = timestamp;
            u = st[match[u]];
            if (u) u = st[pa[u]];
        }
        return 0;
    }

    void add_blossom(int u, int lca, int v) {
        int b = n + 1;
        while (b <= n_x && st[b]) ++b;
        if (b > n_x) ++n_x;
        lab[b] = 0;
        S[b] = 0;
        match[b] = match[lca];
        flower[b].clear();
        flower[b].push_back(lca);
        for (int x = u, y; x != lca; x = st[pa[y]]) {
            flower[b].push_back(x);
            flower[b].push_back(y = st[match[x]]);
            q_push(y);
        }
        std::reverse(flower[b].begin() + 1, flower[b].end());
        for (int x = v, y; x != lca; x = st[pa[y]]) {
            flower[b].push_back(x);
            flower[b].push_back(y = st[match[x]]);
            q_push(y);
        }
        set_st(b, b);
        for (int x = 1; x <= n_x; ++x) g[b][x].w = g[x][b].w = 0;
        for (int x = 1; x <= n; ++x) flower_from[b][x] = 0;
        for (int xs : flower[b]) {
            for (int x = 1; x <= n_x; ++x)
                if (g[b][x].w == 0 || e_delta(g[xs][x]) < e_delta(g[b][x])) {
                    g[b][x] = g[xs][x];
                    g[x][b] = g[x][xs];
                }
            for (int x = 1; x <= n; ++x)
                if (flower_from[xs][x]) flower_from[b][x] = xs;
        }
        set_slack(b);
    }

    void expand_blossom(int b) {
        for (int i : flower[b]) set_st(i, i);
        int xr = flower_from[b][g[b][pa[b]].u];
        int pr = get_pr(b, xr);
        for (int i = 0; i < pr; i += 2) {
            int xs = flower[b][i], xns = flower[b][i + 1];
            pa[xs] = g[xns][xs].u;
            S[xs] = 1;
            S[xns] = 0;
            slack[xs] = 0;
            set_slack(xns);
            q_push(xns);
        }
        S[xr] = 1;
        pa[xr] = pa[b];
        for (size_t i = pr + 1; i < flower[b].size(); ++i) {
            int xs = flower[b][i];
            S[xs] = -1;
            set_slack(xs);
        }
        st[b] = 0;
    }

    bool on_found_edge(const Edge &e) {
        int u = st[e.u], v = st[e.v];
        if (S[v] == -1) {
            pa[v] = e.u;
            S[v] = 1;
            int nu = st[match[v]];
            slack[v] = slack[nu] = 0;
            S[nu] = 0;
            q_push(nu);
        } else if (S[v] == 0) {
            int lca = get_lca(u, v);
            if (!lca) {
                augment(u, v);
                augment(v, u);
                return true;
            }
            add_blossom(u, lca, v);
        }
        return false;
    }

    bool matching() {
        std::fill(S.begin() + 1, S.begin() + n_x + 1, -1);
        std::fill(slack.begin() + 1, slack.begin() + n_x + 1, 0);
        q.clear();
        for (int x = 1; x <= n_x; ++x)
            if (st[x] == x && !match[x]) {
                pa[x] = 0;
                S[x] = 0;
                q_push(x);
            }
        if (q.empty()) return false;
        for (;;) {
            while (!q.empty()) {
                int u = q.front();
                q.pop_front();
                if (S[st[u]] == 1) continue;
                for (int v = 1; v <= n; ++v)
                    if (g[u][v].w > 0 && st[u] != st[v]) {
                        if (e_delta(g[u][v]) == 0) {
                            if (on_found_edge(g[u][v])) return true;
                        } else {
                            update_slack(u, st[v]);
                        }
                    }
            }
            ll d = -1;  // -1 = unset
            for (int b = n + 1; b <= n_x; ++b)
                if (st[b] == b && S[b] == 1 && (d < 0 || lab[b] / 2 < d)) d = lab[b] / 2;
            for (int x = 1; x <= n_x; ++x)
                if (st[x] == x && slack[x]) {
                    ll delta = e_delta(g[slack[x]][x]);
                    if (S[x] == 0) delta /= 2;
                    if (S[x] <= 0 && (d < 0 || delta < d)) d = delta;
                }
            for (int u = 1; u <= n; ++u) {
                if (S[st[u]] == 0) {
                    if (d < 0 || lab[u] <= d) return false;
                    lab[u] -= d;
                } else if (S[st[u]] == 1) {
                    lab[u] += d;
                }
            }
            for (int b = n + 1; b <= n_x; ++b)
                if (st[b] == b) {
                    if (S[b] == 0)
                        lab[b] += 2 * d;
                    else if (S[b] == 1)
                        lab[b] -= 2 * d;
                }
            q.clear();
            for (int x = 1; x <= n_x; ++x)
                if (st[x] == x && slack[x] && st[slack[x]] != x &&
                    e_delta(g[slack[x]][x]) == 0)
                    if (on_found_edge(g[slack[x]][x])) return true;
            for (int b = n + 1; b <= n_x; ++b)
                if (st[b] == b && S[b] == 1 && lab[b] == 0) expand_blossom(b);
        }
    }

    void solve() {
        n_x = n;
        for (int u = 0; u <= n; ++u) {
            st[u] = u;
            flower[u].clear();
        }
        ll w_max = 0;
        for (int u = 1; u <= n; ++u)
            for (int v = 1; v <= n; ++v) {
                flower_from[u][v] = (u == v ? u : 0);
                w_max = std::max(w_max, g[u][v].w);
            }
        for (int u = 1; u <= n; ++u) lab[u] = w_max;
        while (matching()) {
        }
    }
};

}  // namespace

// Maximum-weight matching; edges absent from the list do not exist.  Weights
// must be positive.  Returns mate[i] (or -1 for unmatched vertices).
static py::array_t<int64_t> max_weight_matching(
    int n_nodes,
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> edges,
    py::array_t<int64_t, py::array::c_style | py::array::forcecast> weights) {
    if (n_nodes < 0) throw std::invalid_argument("negative node count");
    auto e = edges.unchecked<2>();
    auto w = weights.unchecked<1>();
    if (e.shape(1) != 2) throw std::invalid_argument("edges must have shape (m, 2)");
    if (e.shape(0) != w.shape(0))
        throw std::invalid_argument("edges and weights must have equal length");

    Blossom solver(n_nodes);
    for (py::ssize_t k = 0; k < e.shape(0); ++k) {
        int64_t u = e(k, 0), v = e(k, 1);
        if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes || u == v)
            throw std::invalid_argument("edge endpoints out of range");
        if (w(k) <= 0) throw std::invalid_argument("weights must be positive");
        // doubling keeps every dual update integral
        solver.g[u + 1][v + 1].w = solver.g[v + 1][u + 1].w = 2 * w(k);
    }
    solver.solve();

    py::array_t<int64_t> mate(n_nodes);
    auto m = mate.mutable_unchecked<1>();
    for (int i = 0; i < n_nodes; ++i)
        m(i) = solver.match[i + 1] > 0 ? solver.match[i + 1] - 1 : -1;
    return mate;
}

PYBIND11_MODULE(_blossom, mod) {
    mod.doc() = "Exact O(n^3) maximum-weight matching (blossom algorithm)";
    mod.def("max_weight_matching", &max_weight_matching, py::arg("n_nodes"),
            py::arg("edges"), py::arg("weights"));
}
