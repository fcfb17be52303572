#include <siol/pattern_dag.hpp>

#include <sstream>
#include <stdexcept>

namespace siol {

const char* to_string(PatternKind kind)
{
    switch (kind) {
        case PatternKind::Block: return "block";
        case PatternKind::Row: return "row";
        case PatternKind::Col: return "col";
        case PatternKind::Entry: return "entry";
    }
    return "?";
}

std::vector<std::pair<Index, Index>> ZeroPattern::coefficients(const GroupStructure& covered) const
{
    std::vector<std::pair<Index, Index>> out;
    const auto& G = covered.input_groups;
    const auto& H = covered.output_groups;
    switch (kind) {
        case PatternKind::Block:
            for (auto k : H[static_cast<std::size_t>(second)])
                for (auto j : G[static_cast<std::size_t>(first)]) out.emplace_back(k, j);
            break;
        case PatternKind::Row:
            for (auto j : G[static_cast<std::size_t>(second)]) out.emplace_back(first, j);
            break;
        case PatternKind::Col:
            for (auto k : H[static_cast<std::size_t>(second)]) out.emplace_back(k, first);
            break;
        case PatternKind::Entry:
            out.emplace_back(first, second);
            break;
    }
    return out;
}

std::string ZeroPattern::label(const GroupStructure&) const
{
    std::ostringstream ss;
    switch (kind) {
        case PatternKind::Block: ss << "B[g" << first + 1 << ",h" << second + 1 << "]"; break;
        case PatternKind::Row: ss << "b_" << first + 1 << "^g" << second + 1; break;
        case PatternKind::Col: ss << "b_h" << second + 1 << "^" << first + 1; break;
        case PatternKind::Entry: ss << "b_" << first + 1 << "^" << second + 1; break;
    }
    return ss.str();
}

namespace {

std::vector<Index> first_group_of(const std::vector<IndexSet>& groups, Index n)
{
    std::vector<Index> first(static_cast<std::size_t>(n), -1);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        for (auto i : groups[gi]) {
            auto& slot = first[static_cast<std::size_t>(i)];
            if (slot < 0) slot = static_cast<Index>(gi);
        }
    }
    return first;
}

}  // namespace

PatternDag::PatternDag(const GroupStructure& gs, Index n_inputs, Index n_outputs, DagOptions opts)
    : groups_(gs.covering(n_inputs, n_outputs)),
      n_inputs_(n_inputs),
      n_outputs_(n_outputs)
{
    n_blocks_ = groups_.input_groups.size() * groups_.output_groups.size();
    first_input_group_ = first_group_of(groups_.input_groups, n_inputs);
    first_output_group_ = first_group_of(groups_.output_groups, n_outputs);
    lazy_ = n_blocks_ > opts.lazy_block_threshold;
    if (lazy_) {
        lazy_owned_.resize(n_blocks_);
        lazy_ready_ = std::make_unique<std::atomic<const BlockSegment*>[]>(n_blocks_);
        for (std::size_t b = 0; b < n_blocks_; ++b) lazy_ready_[b].store(nullptr);
    } else {
        eager_segments_.reserve(n_blocks_);
        for (std::size_t b = 0; b < n_blocks_; ++b) eager_segments_.push_back(build_segment(b));
        materialize();
    }
}

ZeroPattern PatternDag::block_pattern(std::size_t b) const
{
    const auto nh = groups_.output_groups.size();
    return ZeroPattern::block(static_cast<Index>(b / nh), static_cast<Index>(b % nh));
}

BlockSegment PatternDag::build_segment(std::size_t b) const
{
    const auto block = block_pattern(b);
    const Index gi = block.first;
    const Index hi = block.second;
    const auto& g = groups_.input_groups[static_cast<std::size_t>(gi)];
    const auto& h = groups_.output_groups[static_cast<std::size_t>(hi)];

    BlockSegment seg;
    seg.steps.push_back({block, 1});
    for (auto k : h) {
        if (first_output_group_[static_cast<std::size_t>(k)] != hi) continue;
        const auto row_at = seg.steps.size();
        seg.steps.push_back({ZeroPattern::row(k, gi), 1});
        for (auto j : g) {
            // Entry (k, j) is first reached through the earliest block holding it.
            if (first_input_group_[static_cast<std::size_t>(j)] == gi) {
                seg.steps.push_back({ZeroPattern::entry(k, j), 1});
            }
        }
        seg.steps[row_at].skip = static_cast<std::uint32_t>(seg.steps.size() - row_at);
    }
    for (auto j : g) {
        if (first_input_group_[static_cast<std::size_t>(j)] != gi) continue;
        seg.steps.push_back({ZeroPattern::col(j, hi), 1});
    }
    seg.steps[0].skip = static_cast<std::uint32_t>(seg.steps.size());
    return seg;
}

const BlockSegment& PatternDag::segment(std::size_t b) const
{
    if (!lazy_) return eager_segments_[b];
    if (const auto* ready = lazy_ready_[b].load(std::memory_order_acquire)) return *ready;
    std::lock_guard<std::mutex> lock(lazy_mutex_);
    if (const auto* ready = lazy_ready_[b].load(std::memory_order_relaxed)) return *ready;
    lazy_owned_[b] = std::make_unique<BlockSegment>(build_segment(b));
    lazy_ready_[b].store(lazy_owned_[b].get(), std::memory_order_release);
    return *lazy_owned_[b];
}

void PatternDag::materialize()
{
    patterns_.clear();
    patterns_.push_back(ZeroPattern{});  // root placeholder
    skip_index_.clear();
    skip_index_.push_back(0);
    for (const auto& seg : eager_segments_) {
        for (const auto& step : seg.steps) {
            const auto id = static_cast<NodeId>(patterns_.size());
            patterns_.push_back(step.pattern);
            skip_index_.push_back(id + step.skip);
            ids_.emplace(step.pattern, id);
        }
    }
    const auto n = static_cast<NodeId>(patterns_.size());
    skip_index_[0] = n;
    dfs_order_.resize(n);
    for (NodeId i = 0; i < n; ++i) dfs_order_[i] = i;

    children_.assign(n, {});
    const auto& G = groups_.input_groups;
    const auto& H = groups_.output_groups;
    for (NodeId id = 1; id < n; ++id) {
        const auto& p = patterns_[id];
        auto& out = children_[id];
        switch (p.kind) {
            case PatternKind::Block: {
                const auto& g = G[static_cast<std::size_t>(p.first)];
                const auto& h = H[static_cast<std::size_t>(p.second)];
                for (auto k : h) out.push_back(ids_.at(ZeroPattern::row(k, p.first)));
                for (auto j : g) out.push_back(ids_.at(ZeroPattern::col(j, p.second)));
                children_[0].push_back(id);
                break;
            }
            case PatternKind::Row:
                for (auto j : G[static_cast<std::size_t>(p.second)])
                    out.push_back(ids_.at(ZeroPattern::entry(p.first, j)));
                break;
            case PatternKind::Col:
                for (auto k : H[static_cast<std::size_t>(p.second)])
                    out.push_back(ids_.at(ZeroPattern::entry(k, p.first)));
                break;
            case PatternKind::Entry:
                break;
        }
    }
}

void PatternDag::require_eager(const char* what) const
{
    if (lazy_) {
        throw std::logic_error(std::string("PatternDag::") + what +
                               " is unavailable on a lazily built DAG");
    }
}

std::size_t PatternDag::node_count() const
{
    require_eager("node_count");
    return patterns_.size();
}

std::size_t PatternDag::edge_count() const
{
    require_eager("edge_count");
    std::size_t e = 0;
    for (const auto& c : children_) e += c.size();
    return e;
}

const ZeroPattern& PatternDag::pattern(NodeId id) const
{
    require_eager("pattern");
    return patterns_.at(id);
}

const std::vector<NodeId>& PatternDag::children(NodeId id) const
{
    require_eager("children");
    return children_.at(id);
}

const std::vector<NodeId>& PatternDag::dfs_order() const
{
    require_eager("dfs_order");
    return dfs_order_;
}

const std::vector<NodeId>& PatternDag::skip_index() const
{
    require_eager("skip_index");
    return skip_index_;
}

NodeId PatternDag::find(const ZeroPattern& p) const
{
    require_eager("find");
    return ids_.at(p);
}

std::string PatternDag::to_dot() const
{
    require_eager("to_dot");
    std::ostringstream ss;
    ss << "digraph zero_patterns {\n  n0 [label=\"root\"];\n";
    for (NodeId id = 1; id < patterns_.size(); ++id) {
        ss << "  n" << id << " [label=\"" << patterns_[id].label(groups_) << "\"];\n";
    }
    for (NodeId id = 0; id < patterns_.size(); ++id) {
        for (auto c : children_[id]) ss << "  n" << id << " -> n" << c << ";\n";
    }
    ss << "}\n";
    return ss.str();
}

std::unique_ptr<PatternDag> build_dag(const GroupStructure& gs, Index n_inputs, Index n_outputs,
                                      DagOptions opts)
{
    return std::make_unique<PatternDag>(gs, n_inputs, n_outputs, opts);
}

std::vector<NodeId> traverse_with_skip(const PatternDag& dag,
                                       const std::function<bool(NodeId)>& is_zeroed)
{
    const auto& order = dag.dfs_order();
    const auto& skip = dag.skip_index();
    std::vector<NodeId> out;
    std::size_t t = 1;
    while (t < order.size()) {
        const NodeId id = order[t];
        out.push_back(id);
        t = is_zeroed(id) ? skip[t] : t + 1;
    }
    return out;
}

}  // namespace siol
