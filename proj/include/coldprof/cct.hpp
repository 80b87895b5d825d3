#pragma once

// Calling Context Tree built from sampled call paths.
//
// Node identity is the frame (file, line of the call site, function), so the
// same function reached from two call sites, or two calls on adjacent lines,
// lands on distinct nodes. Recursion is kept as repeated nodes. Children are
// ordered by frame, which makes the canonical dump independent of insertion
// and merge order.

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "coldprof/package_mapper.hpp"
#include "coldprof/trace_model.hpp"

namespace coldprof {

using NodeId = std::size_t;

struct CctNode {
    Frame frame;
    ModulePath module;
    std::string module_dotted;  // cached module.dotted()
    std::int64_t init_count = 0;  // samples whose innermost frame is this node
    std::int64_t exec_count = 0;
    NodeId parent = 0;
    std::map<Frame, NodeId> children;

    std::int64_t sample_count() const { return init_count + exec_count; }
};

enum class PhaseFilter { kExecOnly, kAll };

struct PathCount {
    CallPath path;
    std::int64_t count = 0;

    bool operator==(const PathCount&) const = default;
};

class CallingContextTree {
  public:
    static constexpr NodeId kRoot = 0;

    CallingContextTree();
    CallingContextTree(std::string app_id, std::string manifest_hash);

    void insert_path(const CallPath& path, Phase phase, std::int64_t count = 1);
    void insert_trace(const InvocationTrace& trace);

    /// Labels every node with its module via map_frame.
    void annotate_libraries(const RootConfig& roots);

    const CctNode& node(NodeId id) const { return nodes_.at(id); }
    std::size_t size() const { return nodes_.size(); }

    std::int64_t total_samples() const { return init_samples_ + exec_samples_; }
    std::int64_t init_samples() const { return init_samples_; }
    std::int64_t exec_samples() const { return exec_samples_; }
    std::int64_t samples(PhaseFilter filter) const {
        return filter == PhaseFilter::kExecOnly ? exec_samples_ : total_samples();
    }

    const std::string& app_id() const { return app_id_; }
    const std::string& manifest_hash() const { return manifest_hash_; }

    std::int64_t subtree_count(NodeId id, PhaseFilter filter = PhaseFilter::kAll) const;

    /// Root-to-node frames, entry point first; the synthetic root is omitted.
    CallPath path_of(NodeId id) const;

    /// Σ innermost counts over nodes whose library (or dotted-path prefix) matches.
    /// A reserved label such as "(app)" matches by library.
    std::int64_t samples_in(std::string_view dotted_prefix, PhaseFilter filter) const;

    /// True if the node's module lies under the dotted prefix.
    bool node_matches(NodeId id, std::string_view dotted_prefix) const;

    /// Outermost nodes inside `dotted_prefix` (no ancestor inside it), as
    /// root-to-node paths with their subtree counts over all phases. The
    /// `top_k` largest are returned, counts non-increasing, ties by path.
    /// With `by_import_site`, entries below the same parent node are folded
    /// into one (the largest entry's path, the summed count).
    std::vector<PathCount> paths_to(std::string_view dotted_prefix, std::size_t top_k,
                                    bool by_import_site = false) const;

    /// One JSON object per node in pre-order; children in frame order.
    std::string canonical_dump() const;

    /// Flame-graph collapsed stacks: "frame;frame;frame count" for every node
    /// with samples. Frames render as "function (file:line)".
    std::string collapsed_stacks(const RootConfig* roots = nullptr, PhaseFilter filter = PhaseFilter::kAll) const;

    /// Rebuilds a tree from node counts (deserialization).
    void set_counts(NodeId id, std::int64_t init_count, std::int64_t exec_count);
    NodeId child(NodeId parent, const Frame& frame);

  private:
    std::vector<CctNode> nodes_;
    std::string app_id_;
    std::string manifest_hash_;
    std::int64_t init_samples_ = 0;
    std::int64_t exec_samples_ = 0;

    friend CallingContextTree merge(const CallingContextTree& a, const CallingContextTree& b);
};

/// Node-wise union with added counts. Throws MergeError if both trees carry
/// different non-empty code manifests.
CallingContextTree merge(const CallingContextTree& a, const CallingContextTree& b);

}  // namespace coldprof
