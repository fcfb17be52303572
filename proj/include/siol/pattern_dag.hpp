#pragma once
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>
#include <siol/core_model.hpp>

namespace siol {

// Declaration order is the tie-break order among siblings.
enum class PatternKind : std::uint8_t { Block = 0, Row = 1, Col = 2, Entry = 3 };

const char* to_string(PatternKind kind);

/**
 * A zero pattern over the coefficient matrix.
 *   Block(g, h)  : {(k, j) : k in h, j in g}
 *   Row(k, g)    : {(k, j) : j in g}        (beta_k^g)
 *   Col(j, h)    : {(k, j) : k in h}        (beta_h^j)
 *   Entry(k, j)  : {(k, j)}
 * g and h are indices into the covered input/output group lists.
 */
struct ZeroPattern
{
    PatternKind kind = PatternKind::Entry;
    Index first = 0;
    Index second = 0;

    static ZeroPattern block(Index g, Index h) { return {PatternKind::Block, g, h}; }
    static ZeroPattern row(Index k, Index g) { return {PatternKind::Row, k, g}; }
    static ZeroPattern col(Index j, Index h) { return {PatternKind::Col, j, h}; }
    static ZeroPattern entry(Index k, Index j) { return {PatternKind::Entry, k, j}; }

    std::vector<std::pair<Index, Index>> coefficients(const GroupStructure& covered) const;
    std::string label(const GroupStructure& covered) const;

    bool operator==(const ZeroPattern&) const = default;
    auto operator<=>(const ZeroPattern&) const = default;
};

struct ZeroPatternHash
{
    std::size_t operator()(const ZeroPattern& p) const noexcept
    {
        std::uint64_t h = static_cast<std::uint64_t>(p.kind);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(p.first);
        h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint64_t>(p.second);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

struct DfsStep
{
    ZeroPattern pattern;
    // Steps to advance within the segment to reach the next non-descendant.
    std::uint32_t skip = 1;
};

/// The DFS run of one block: steps[0] is Block(g, h), followed by the nodes it discovers.
struct BlockSegment
{
    std::vector<DfsStep> steps;
};

struct DagOptions
{
    std::size_t lazy_block_threshold = 1'000'000;
};

using NodeId = std::uint32_t;

/**
 * Hasse diagram of the zero patterns of every (g, h) block, joined under a dummy root.
 *
 * Nodes are deduplicated by pattern: Row(k, g) is shared by every block (g, h) with
 * k in h, Col(j, h) by every (g, h) with j in g, Entry(k, j) by every block holding it.
 * Every node is discovered by a fixed owner block (the first block in (g, h) order that
 * reaches it), so each block's DFS segment can be built independently. Small DAGs are
 * materialized eagerly with node ids in DFS order; past the threshold the segments are
 * built on first access and the explicit graph view is unavailable.
 */
class PatternDag
{
public:
    static constexpr NodeId root = 0;

    PatternDag(const GroupStructure& gs, Index n_inputs, Index n_outputs, DagOptions opts = {});

    PatternDag(const PatternDag&) = delete;
    PatternDag& operator=(const PatternDag&) = delete;

    const GroupStructure& groups() const { return groups_; }
    Index n_inputs() const { return n_inputs_; }
    Index n_outputs() const { return n_outputs_; }

    std::size_t n_blocks() const { return n_blocks_; }
    ZeroPattern block_pattern(std::size_t b) const;
    const BlockSegment& segment(std::size_t b) const;
    bool is_lazy() const { return lazy_; }

    // Explicit graph view; requires an eagerly built DAG.
    std::size_t node_count() const;   // includes the root
    std::size_t edge_count() const;
    const ZeroPattern& pattern(NodeId id) const;
    const std::vector<NodeId>& children(NodeId id) const;
    const std::vector<NodeId>& dfs_order() const;
    const std::vector<NodeId>& skip_index() const;
    NodeId find(const ZeroPattern& p) const;
    std::string to_dot() const;

private:
    BlockSegment build_segment(std::size_t b) const;
    void materialize();
    void require_eager(const char* what) const;

    GroupStructure groups_;
    Index n_inputs_ = 0;
    Index n_outputs_ = 0;
    std::size_t n_blocks_ = 0;
    bool lazy_ = false;

    // Index of the first input (output) group containing each input (output).
    std::vector<Index> first_input_group_;
    std::vector<Index> first_output_group_;

    std::vector<BlockSegment> eager_segments_;
    mutable std::vector<std::unique_ptr<BlockSegment>> lazy_owned_;
    mutable std::unique_ptr<std::atomic<const BlockSegment*>[]> lazy_ready_;
    mutable std::mutex lazy_mutex_;

    // Eager graph view.
    std::vector<ZeroPattern> patterns_;
    std::vector<std::vector<NodeId>> children_;
    std::vector<NodeId> dfs_order_;
    std::vector<NodeId> skip_index_;
    std::unordered_map<ZeroPattern, NodeId, ZeroPatternHash> ids_;
};

/// Builds the DAG over gs completed with singleton groups.
std::unique_ptr<PatternDag> build_dag(const GroupStructure& gs, Index n_inputs, Index n_outputs,
                                      DagOptions opts = {});

/**
 * Walks the DAG in DFS order (root excluded). The visitor returns true when the node it
 * was handed is (now) zero; the walk then skips that node's descendants.
 */
template <class Visitor>
void for_each_with_skip(const PatternDag& dag, Visitor&& visit, bool skip_descendants = true)
{
    for (std::size_t b = 0; b < dag.n_blocks(); ++b) {
        const bool block_zero = visit(dag.block_pattern(b));
        if (block_zero && skip_descendants) continue;
        const auto& steps = dag.segment(b).steps;
        std::size_t t = 1;
        while (t < steps.size()) {
            const bool zero = visit(steps[t].pattern);
            t += (zero && skip_descendants) ? steps[t].skip : 1;
        }
    }
}

/// Node ids in visit order; eager DAGs only.
std::vector<NodeId> traverse_with_skip(const PatternDag& dag,
                                       const std::function<bool(NodeId)>& is_zeroed);

}  // namespace siol
