#pragma once

#include <cstdint>
#include <vector>

namespace distlab {

/// Exact min-cost solver for the balanced transportation problem on the
/// complete bipartite graph: minimize sum c_ij * f_ij subject to
/// row sums = supplies, column sums = demands, f >= 0.
///
/// Primal network simplex with the classic spanning-tree representation
/// (parent / pred-arc / preorder thread / subtree counters) and a
/// first-eligible Bland-style pivot scanned round-robin from the previous
/// entering arc, which keeps runs deterministic and avoids stalling on the
/// heavily degenerate uniform-marginal instances this library produces.
class BipartiteNetworkSimplex {
public:
    struct Result {
        bool success = false;
        double total_cost = 0.0;
        long iterations = 0;
        double max_artificial_flow = 0.0; // residual on the auxiliary arcs, ~0 on success
    };

    /// supplies and demands must both sum to the same total (tolerance 1e-9).
    /// costs is row-major with costs[i * demands.size() + j].
    Result solve(const std::vector<double>& supplies,
                 const std::vector<double>& demands,
                 const std::vector<double>& costs,
                 long max_iterations = 0); // 0 -> automatic bound

    /// Flow on real arc (i, j) after a successful solve.
    double flow(int i, int j) const { return flow_[static_cast<std::size_t>(i) * n_target_ + j]; }

    int source_count() const { return static_cast<int>(n_source_); }
    int target_count() const { return static_cast<int>(n_target_); }

private:
    using Index = std::int64_t;

    enum ArcState : signed char { kStateUpper = -1, kStateTree = 0, kStateLower = 1 };

    Index arc_source(Index a) const { return a / n_target_; }
    Index arc_target(Index a) const { return (a % n_target_) + n_source_; }

    bool find_entering_arc();
    void find_join_node();
    bool find_leaving_arc();
    void apply_flow_change(bool basis_change);
    void update_tree();
    void update_potentials();

    Index n_source_ = 0, n_target_ = 0;
    Index node_count_ = 0;
    Index real_arc_count_ = 0, all_arc_count_ = 0;

    std::vector<double> cost_;
    std::vector<double> flow_;
    std::vector<double> potential_;
    std::vector<double> supply_;

    // Spanning-tree bookkeeping, indexed by node (root is node_count_).
    std::vector<Index> parent_, thread_, rev_thread_, succ_count_, last_succ_;
    std::vector<Index> pred_arc_;
    std::vector<signed char> pred_forward_;
    std::vector<signed char> state_;
    std::vector<Index> dirty_revs_;

    // Pivot iteration scratch.
    Index next_arc_ = 0;
    Index entering_arc_ = -1;
    Index join_ = -1, u_in_ = -1, v_in_ = -1, u_out_ = -1;
    Index first_ = -1, second_ = -1;
    double delta_ = 0.0;
    double cost_scale_ = 1.0;
};

} // namespace distlab
