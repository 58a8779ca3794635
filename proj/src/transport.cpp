#include "wca/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace wca {

namespace {

// Costs are pairs (r, m) meaning r + m*M for a symbolically infinite M, so
// artificial arcs (cost (0,1)) never contaminate real reduced costs with
// rounded big-M terms. Comparisons are lexicographic in (m, r).
struct CostPair {
    double r = 0;
    int m = 0;
};
CostPair operator+(CostPair a, CostPair b) { return {a.r + b.r, a.m + b.m}; }
CostPair operator-(CostPair a, CostPair b) { return {a.r - b.r, a.m - b.m}; }

enum class State : std::uint8_t { Tree, Lower, Upper };

class NetworkSimplex {
  public:
    NetworkSimplex(const Mat& c, const std::vector<double>& w, const std::vector<double>& lo,
                   const std::vector<double>& hi)
        : n_(static_cast<int>(w.size())), k_(static_cast<int>(lo.size())) {
        sink_ = n_ + k_;
        root_ = n_ + k_ + 1;
        num_nodes_ = n_ + k_ + 2;

        double w_total = 0, lo_total = 0;
        double max_cost = 0;
        for (double v : w) w_total += v;
        for (double v : lo) lo_total += v;
        for (int i = 0; i < k_; ++i)
            for (int j = 0; j < n_; ++j) max_cost = std::max(max_cost, std::abs(c(i, j)));
        rc_tol_ = 1e-11 * (1.0 + max_cost);
        flow_scale_ = 1.0 + w_total;

        balance_.assign(num_nodes_, 0.0);
        for (int j = 0; j < n_; ++j) balance_[j] = w[j];
        for (int i = 0; i < k_; ++i) balance_[n_ + i] = -lo[i];
        balance_[sink_] = -(w_total - lo_total);

        // Point arcs j -> cluster i, then sink arcs cluster i -> sink, then one
        // artificial arc per non-root node.
        int arcs = n_ * k_ + k_ + (num_nodes_ - 1);
        tail_.reserve(arcs); head_.reserve(arcs); cost_.reserve(arcs);
        cap_.reserve(arcs); flow_.reserve(arcs); state_.reserve(arcs); fixed_.reserve(arcs);
        for (int j = 0; j < n_; ++j)
            for (int i = 0; i < k_; ++i)
                add_arc(j, n_ + i, {c(i, j), 0}, kInf);
        for (int i = 0; i < k_; ++i) {
            double cap = hi[i] == kInf ? kInf : hi[i] - lo[i];
            add_arc(n_ + i, sink_, {0, 0}, cap);
            if (cap <= 0) fixed_.back() = true;  // equality bound: variable pinned at 0
        }
        first_artificial_ = static_cast<int>(tail_.size());
        for (int v = 0; v < num_nodes_ - 1; ++v) {
            // Supply >= 0 hangs v below the root pointing up, deficits point
            // down with positive flow; both orientations keep the initial star
            // strongly feasible.
            if (balance_[v] >= 0) {
                add_arc(v, root_, {0, 1}, kInf);
                flow_.back() = balance_[v];
            } else {
                add_arc(root_, v, {0, 1}, kInf);
                flow_.back() = -balance_[v];
            }
            state_.back() = State::Tree;
        }
        num_arcs_ = static_cast<int>(tail_.size());

        parent_.assign(num_nodes_, -1);
        parc_.assign(num_nodes_, -1);
        for (int v = 0; v < num_nodes_ - 1; ++v) {
            parent_[v] = root_;
            parc_[v] = first_artificial_ + v;
        }
        depth_.assign(num_nodes_, 0);
        pot_r_.assign(num_nodes_, 0.0);
        pot_m_.assign(num_nodes_, 0);
        rebuild_tree_arrays();
        pivot_guard_ = 2000 + 40L * num_nodes_ + 4L * num_arcs_;
    }

    TransportSolution run() {
        // Main phase: block pricing + Cunningham's leaving rule on the
        // strongly feasible artificial star.
        long pivots = 0;
        int scan_from = 0;
        for (;;) {
            int e = price_block(scan_from, /*artificials=*/true);
            if (e < 0) break;
            require(++pivots <= pivot_guard_, "network simplex exceeded pivot guard (",
                    pivot_guard_, ")");
            pivot(e, /*bland=*/false);
        }
        drive_out_artificials();
        // Dual cleanup: degenerate pivots with Bland's rule until the real
        // reduced costs are feasible. The flow value is already optimal, so
        // only basis exchanges happen here.
        for (;;) {
            int e = price_lowest(/*artificials=*/false);
            if (e < 0) break;
            require(++pivots <= pivot_guard_, "network simplex exceeded pivot guard (",
                    pivot_guard_, ") in dual cleanup");
            pivot(e, /*bland=*/true);
        }
        recompute_exact();

        TransportSolution out;
        out.flow = Mat::Zero(k_, n_);
        for (int j = 0; j < n_; ++j)
            for (int i = 0; i < k_; ++i) out.flow(i, j) = flow_[j * k_ + i];
        out.point_potential.resize(n_);
        out.cluster_potential.resize(k_);
        double shift = pot_r_[sink_];
        for (int j = 0; j < n_; ++j) out.point_potential[j] = pot_r_[j] - shift;
        for (int i = 0; i < k_; ++i) out.cluster_potential[i] = pot_r_[n_ + i] - shift;
        double total = 0;
        for (int a = 0; a < first_artificial_; ++a) total += cost_[a].r * flow_[a];
        out.cost = total;
        out.pivots = pivots;
        return out;
    }

  private:
    void add_arc(int t, int h, CostPair c, double cap) {
        tail_.push_back(t);
        head_.push_back(h);
        cost_.push_back(c);
        cap_.push_back(cap);
        flow_.push_back(0.0);
        state_.push_back(State::Lower);
        fixed_.push_back(false);
    }

    CostPair reduced_cost(int a) const {
        return cost_[a] - CostPair{pot_r_[tail_[a]], pot_m_[tail_[a]]} +
               CostPair{pot_r_[head_[a]], pot_m_[head_[a]]};
    }

    // Lexicographic violation magnitude; (0,0) means dual feasible.
    CostPair violation(int a) const {
        if (state_[a] == State::Tree || fixed_[a]) return {0, 0};
        CostPair rc = reduced_cost(a);
        if (state_[a] == State::Lower) {
            if (rc.m < 0 || (rc.m == 0 && rc.r < -rc_tol_)) return {-rc.r, -rc.m};
        } else {
            if (rc.m > 0 || (rc.m == 0 && rc.r > rc_tol_)) return {rc.r, rc.m};
        }
        return {0, 0};
    }

    static bool lex_less(CostPair a, CostPair b) {
        if (a.m != b.m) return a.m < b.m;
        return a.r < b.r;
    }

    int price_block(int& scan_from, bool artificials) {
        int limit = artificials ? num_arcs_ : first_artificial_;
        int block = std::max(64, static_cast<int>(std::sqrt(double(limit))));
        int best = -1, seen = 0, a = scan_from % limit;
        CostPair best_v{0, 0};
        while (seen < limit) {
            for (int cnt = 0; cnt < block && seen < limit; ++cnt, ++seen) {
                CostPair v = violation(a);
                if (lex_less(best_v, v)) {
                    best_v = v;
                    best = a;
                }
                if (++a == limit) a = 0;
            }
            if (best >= 0) {
                scan_from = a;
                return best;
            }
        }
        return -1;
    }

    int price_lowest(bool artificials) const {
        int limit = artificials ? num_arcs_ : first_artificial_;
        for (int a = 0; a < limit; ++a) {
            CostPair v = violation(a);
            if (v.m != 0 || v.r != 0) return a;
        }
        return -1;
    }

    // Cycle step: arc a traversed from `from`; forward means along tail->head.
    struct Step {
        int arc;
        bool forward;
    };

    double residual(const Step& s) const {
        if (s.forward) return cap_[s.arc] == kInf ? kInf : cap_[s.arc] - flow_[s.arc];
        return flow_[s.arc];
    }

    void pivot(int e, bool bland) {
        int u = tail_[e], v = head_[e];
        bool lower_entering = state_[e] == State::Lower;

        // Apex of the cycle closed by e.
        int x = u, y = v;
        while (depth_[x] > depth_[y]) x = parent_[x];
        while (depth_[y] > depth_[x]) y = parent_[y];
        while (x != y) { x = parent__at(x); y = parent__at(y); }
        int apex = x;

        // Orientation: flow increases along e for lower entering (u -> e -> v
        // -> apex), decreases otherwise. Listed from the apex along the cycle
        // orientation so Cunningham's rule can take the last blocking arc.
        std::vector<Step> cycle;
        auto push_path_down = [&](int node) {
            // apex -> node, i.e. tree arcs visited parent-to-child.
            std::vector<Step> seg;
            for (int w2 = node; w2 != apex; w2 = parent_[w2])
                seg.push_back({parc_[w2], head_[parc_[w2]] == w2});
            for (auto it = seg.rbegin(); it != seg.rend(); ++it) cycle.push_back(*it);
        };
        auto push_path_up = [&](int node) {
            // node -> apex, tree arcs visited child-to-parent.
            for (int w2 = node; w2 != apex; w2 = parent_[w2])
                cycle.push_back({parc_[w2], tail_[parc_[w2]] == w2});
        };
        if (lower_entering) {
            push_path_down(u);
            cycle.push_back({e, true});
            push_path_up(v);
        } else {
            push_path_down(v);
            cycle.push_back({e, false});
            push_path_up(u);
        }

        double theta = kInf;
        for (const Step& s : cycle) theta = std::min(theta, residual(s));
        require(theta != kInf, "transportation LP is unbounded; this cannot happen with "
                               "nonnegative costs");
        double block_tol = 1e-12 * (flow_scale_ + theta);

        int leave_idx = -1;
        if (bland) {
            int best_arc = num_arcs_;
            for (int ci = 0; ci < static_cast<int>(cycle.size()); ++ci)
                if (residual(cycle[ci]) <= theta + block_tol && cycle[ci].arc < best_arc) {
                    best_arc = cycle[ci].arc;
                    leave_idx = ci;
                }
        } else {
            for (int ci = 0; ci < static_cast<int>(cycle.size()); ++ci)
                if (residual(cycle[ci]) <= theta + block_tol) leave_idx = ci;
        }
        require(leave_idx >= 0, "no blocking arc found in simplex cycle");

        if (theta > 0) {
            for (const Step& s : cycle) {
                flow_[s.arc] += s.forward ? theta : -theta;
                double snap = 1e-12 * (1.0 + theta);
                if (flow_[s.arc] < snap) flow_[s.arc] = std::max(0.0, flow_[s.arc]);
                if (flow_[s.arc] < 0 && flow_[s.arc] > -snap) flow_[s.arc] = 0;
                if (cap_[s.arc] != kInf && std::abs(cap_[s.arc] - flow_[s.arc]) < snap)
                    flow_[s.arc] = cap_[s.arc];
            }
        }

        const Step leaving = cycle[leave_idx];
        if (leaving.arc == e) {
            // The entering arc saturates itself: a bound flip, no tree change.
            state_[e] = lower_entering ? State::Upper : State::Lower;
            flow_[e] = lower_entering ? cap_[e] : 0.0;
            return;
        }

        // The leaving arc drops to whichever bound blocked it.
        state_[leaving.arc] = leaving.forward ? State::Upper : State::Lower;
        flow_[leaving.arc] = leaving.forward ? cap_[leaving.arc] : 0.0;
        state_[e] = State::Tree;
        attach(e, leaving.arc);
        rebuild_tree_arrays();
    }

    int parent__at(int v) const {
        require(v != root_, "walked past the root while seeking a cycle apex");
        return parent_[v];
    }

    // Re-hang the subtree cut off by removing `leaving` using tree arc `e`.
    void attach(int e, int leaving) {
        int z = (parent_[tail_[leaving]] == head_[leaving]) ? tail_[leaving] : head_[leaving];
        int u = in_subtree(tail_[e], z) ? tail_[e] : head_[e];
        int other = (u == tail_[e]) ? head_[e] : tail_[e];
        // Reverse parent pointers along z .. u, then hook u below `other`.
        int node = u, new_parent = other, new_parc = e;
        while (true) {
            int next = parent_[node];
            int next_arc = parc_[node];
            parent_[node] = new_parent;
            parc_[node] = new_parc;
            if (node == z) break;
            new_parent = node;
            new_parc = next_arc;
            node = next;
        }
    }

    bool in_subtree(int x, int z) const {
        while (depth_[x] > depth_[z]) x = parent_[x];
        return x == z;
    }

    void rebuild_tree_arrays() {
        // children lists -> DFS from root recomputing depth and potentials.
        std::vector<int> head_child(num_nodes_, -1), next_sib(num_nodes_, -1);
        for (int v2 = 0; v2 < num_nodes_; ++v2) {
            if (v2 == root_) continue;
            next_sib[v2] = head_child[parent_[v2]];
            head_child[parent_[v2]] = v2;
        }
        pot_r_[root_] = 0;
        pot_m_[root_] = 0;
        depth_[root_] = 0;
        std::vector<int> stack{root_};
        while (!stack.empty()) {
            int p = stack.back();
            stack.pop_back();
            for (int c2 = head_child[p]; c2 != -1; c2 = next_sib[c2]) {
                depth_[c2] = depth_[p] + 1;
                int a = parc_[c2];
                // Tree arcs have zero reduced cost: c - pot[tail] + pot[head] = 0.
                if (tail_[a] == c2) {
                    pot_r_[c2] = cost_[a].r + pot_r_[p];
                    pot_m_[c2] = cost_[a].m + pot_m_[p];
                } else {
                    pot_r_[c2] = pot_r_[p] - cost_[a].r;
                    pot_m_[c2] = pot_m_[p] - cost_[a].m;
                }
                stack.push_back(c2);
            }
        }
    }

    // After the main phase the root star may retain degenerate artificial
    // arcs. Swap each for a real arc crossing its cut (flows are unchanged)
    // until the root is a leaf; real duals are then M-free.
    void drive_out_artificials() {
        double feas_tol = 1e-9 * flow_scale_;
        for (;;) {
            std::vector<int> root_children;
            for (int v = 0; v < num_nodes_; ++v)
                if (v != root_ && parent_[v] == root_) root_children.push_back(v);
            require(!root_children.empty(), "simplex tree lost the root");
            if (static_cast<int>(root_children.size()) == 1) break;
            int z = root_children.back();
            int art = parc_[z];
            require(flow_[art] <= feas_tol, "transportation LP infeasible: artificial flow ",
                    flow_[art], " remains (weights vs bounds are inconsistent)");
            flow_[art] = 0;
            // Mark T_z, then find a real arc crossing the cut.
            std::vector<char> mark(num_nodes_, 0);
            mark_subtree(z, mark);
            int best = -1;
            double best_rc = kInf;
            for (int a = 0; a < first_artificial_; ++a) {
                if (state_[a] == State::Tree) continue;
                if (mark[tail_[a]] == mark[head_[a]]) continue;
                double rc = std::abs(reduced_cost(a).r);
                if (rc < best_rc) {
                    best_rc = rc;
                    best = a;
                }
            }
            require(best >= 0, "no real arc crosses an artificial cut; graph disconnected");
            state_[art] = State::Lower;
            State entering_state = state_[best];
            state_[best] = State::Tree;
            // Keep the entering arc at its bound value; the swap is degenerate.
            flow_[best] = entering_state == State::Upper ? cap_[best] : flow_[best];
            attach(best, art);
            rebuild_tree_arrays();
        }
    }

    void mark_subtree(int z, std::vector<char>& mark) const {
        std::vector<int> head_child(num_nodes_, -1), next_sib(num_nodes_, -1);
        for (int v = 0; v < num_nodes_; ++v) {
            if (v == root_) continue;
            next_sib[v] = head_child[parent_[v]];
            head_child[parent_[v]] = v;
        }
        std::vector<int> stack{z};
        while (!stack.empty()) {
            int p = stack.back();
            stack.pop_back();
            mark[p] = 1;
            for (int c2 = head_child[p]; c2 != -1; c2 = next_sib[c2]) stack.push_back(c2);
        }
    }

    // Solve the tree system exactly: nonbasic arcs sit on their bounds, basic
    // flows come from the balances leaf-up, potentials root-down.
    void recompute_exact() {
        std::vector<double> acc(balance_);
        for (int a = 0; a < num_arcs_; ++a) {
            if (state_[a] == State::Tree) continue;
            double f = state_[a] == State::Upper ? cap_[a] : 0.0;
            flow_[a] = f;
            if (f != 0) {
                acc[tail_[a]] -= f;
                acc[head_[a]] += f;
            }
        }
        std::vector<int> order(num_nodes_);
        for (int v = 0; v < num_nodes_; ++v) order[v] = v;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return depth_[a] > depth_[b]; });
        double feas_tol = 1e-9 * flow_scale_;
        for (int v : order) {
            if (v == root_) continue;
            int f = parc_[v];
            double phi = (tail_[f] == v) ? acc[v] : -acc[v];
            if (phi < 0) {
                require(phi > -feas_tol, "basic flow went negative (", phi,
                        ") during exact recomputation");
                phi = 0;
            }
            if (cap_[f] != kInf && phi > cap_[f]) {
                require(phi < cap_[f] + feas_tol, "basic flow exceeds capacity during exact "
                                                  "recomputation");
                phi = cap_[f];
            }
            if (f >= first_artificial_) {
                require(phi <= feas_tol, "transportation LP infeasible: artificial flow ", phi,
                        " remains (weights vs bounds are inconsistent)");
                phi = 0;
            }
            flow_[f] = phi;
            if (tail_[f] == v) acc[head_[f]] += phi;
            else acc[tail_[f]] -= phi;
        }
        rebuild_tree_arrays();
        int sink_m = pot_m_[sink_];
        for (int v = 0; v < num_nodes_; ++v)
            if (v != root_)
                require(pot_m_[v] == sink_m, "artificial cost leaked into the duals");
    }

    int n_, k_, sink_, root_, num_nodes_, num_arcs_ = 0, first_artificial_ = 0;
    double rc_tol_ = 0, flow_scale_ = 1;
    long pivot_guard_ = 0;
    std::vector<double> balance_;
    std::vector<int> tail_, head_;
    std::vector<CostPair> cost_;
    std::vector<double> cap_, flow_;
    std::vector<State> state_;
    std::vector<char> fixed_;
    std::vector<int> parent_, parc_, depth_;
    std::vector<double> pot_r_;
    std::vector<int> pot_m_;
};

}  // namespace

TransportSolution solve_transport(const Mat& unit_cost, const std::vector<double>& w,
                                  const std::vector<double>& lo,
                                  const std::vector<double>& hi) {
    int n = static_cast<int>(w.size()), k = static_cast<int>(lo.size());
    require(n >= 1 && k >= 1, "transportation instance needs points and clusters");
    require(unit_cost.rows() == k && unit_cost.cols() == n, "cost matrix is ",
            unit_cost.rows(), "x", unit_cost.cols(), ", expected ", k, "x", n);
    require(hi.size() == lo.size(), "bound vectors disagree in length");
    double W = 0, lo_sum = 0, hi_sum = 0;
    for (double v : w) {
        require(std::isfinite(v) && v > 0, "point weights must be finite and positive");
        W += v;
    }
    for (int i = 0; i < k; ++i) {
        require(lo[i] >= 0 && lo[i] <= hi[i], "cluster ", i, " has invalid bounds [", lo[i],
                ", ", hi[i], "]");
        lo_sum += lo[i];
        hi_sum += hi[i];
    }
    require(lo_sum <= W, "infeasible bounds: sum kappa^- = ", lo_sum,
            " exceeds omega(X) = ", W);
    require(W <= hi_sum, "infeasible bounds: omega(X) = ", W, " exceeds sum kappa^+ = ",
            hi_sum);
    NetworkSimplex solver(unit_cost, w, lo, hi);
    return solver.run();
}

}  // namespace wca
