#include "coldprof/cct.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "json.hpp"

#include "coldprof/errors.hpp"

namespace coldprof {

namespace {

Frame root_frame() { return Frame{"(root)", 1, "(root)"}; }

// Children are always created after their parent, so ids are a topological order.
std::vector<std::int64_t> all_subtree_counts(const std::vector<CctNode>& nodes, PhaseFilter filter) {
    std::vector<std::int64_t> counts(nodes.size(), 0);
    for (std::size_t i = nodes.size(); i-- > 0;) {
        const auto& n = nodes[i];
        counts[i] += filter == PhaseFilter::kExecOnly ? n.exec_count : n.sample_count();
        if (i != CallingContextTree::kRoot) counts[n.parent] += counts[i];
    }
    return counts;
}

}  // namespace

CallingContextTree::CallingContextTree() : CallingContextTree("", "") {}

CallingContextTree::CallingContextTree(std::string app_id, std::string manifest_hash)
    : app_id_(std::move(app_id)), manifest_hash_(std::move(manifest_hash)) {
    CctNode root;
    root.frame = root_frame();
    root.module.library = std::string(kUnknownLabel);
    nodes_.push_back(std::move(root));
}

NodeId CallingContextTree::child(NodeId parent, const Frame& frame) {
    auto& children = nodes_[parent].children;
    if (auto it = children.find(frame); it != children.end()) return it->second;
    const NodeId id = nodes_.size();
    CctNode node;
    node.frame = frame;
    node.module.library = std::string(kUnknownLabel);
    node.parent = parent;
    nodes_.push_back(std::move(node));
    nodes_[parent].children.emplace(frame, id);
    return id;
}

void CallingContextTree::insert_path(const CallPath& path, Phase phase, std::int64_t count) {
    NodeId cur = kRoot;
    for (const auto& frame : path.frames) cur = child(cur, frame);
    if (phase == Phase::kInit) {
        nodes_[cur].init_count += count;
        init_samples_ += count;
    } else {
        nodes_[cur].exec_count += count;
        exec_samples_ += count;
    }
}

void CallingContextTree::insert_trace(const InvocationTrace& trace) {
    if (manifest_hash_.empty() && total_samples() == 0) {
        app_id_ = trace.meta.app_id;
        manifest_hash_ = trace.meta.code_manifest_hash;
    } else if (trace.meta.code_manifest_hash != manifest_hash_) {
        throw MergeError("invocation " + trace.meta.invocation_id + " has code manifest " +
                         trace.meta.code_manifest_hash + ", tree has " + manifest_hash_);
    }
    for (const auto& s : trace.samples) insert_path(s.call_path, s.phase);
}

void CallingContextTree::set_counts(NodeId id, std::int64_t init_count, std::int64_t exec_count) {
    auto& n = nodes_.at(id);
    init_samples_ += init_count - n.init_count;
    exec_samples_ += exec_count - n.exec_count;
    n.init_count = init_count;
    n.exec_count = exec_count;
}

void CallingContextTree::annotate_libraries(const RootConfig& roots) {
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        nodes_[i].module = map_frame(nodes_[i].frame, roots);
        nodes_[i].module_dotted = nodes_[i].module.dotted();
    }
}

std::int64_t CallingContextTree::subtree_count(NodeId id, PhaseFilter filter) const {
    const auto& n = nodes_.at(id);
    std::int64_t total = filter == PhaseFilter::kExecOnly ? n.exec_count : n.sample_count();
    for (const auto& [frame, child_id] : n.children) total += subtree_count(child_id, filter);
    return total;
}

CallPath CallingContextTree::path_of(NodeId id) const {
    CallPath out;
    for (NodeId cur = id; cur != kRoot; cur = nodes_.at(cur).parent) out.frames.push_back(nodes_[cur].frame);
    std::reverse(out.frames.begin(), out.frames.end());
    return out;
}

bool CallingContextTree::node_matches(NodeId id, std::string_view dotted_prefix) const {
    if (id == kRoot) return false;
    const auto& n = nodes_.at(id);
    if (is_reserved_label(dotted_prefix)) return n.module.library == dotted_prefix;
    return n.module.kind == ModuleKind::kLibraryModule && dotted_has_prefix(n.module_dotted, dotted_prefix);
}

std::int64_t CallingContextTree::samples_in(std::string_view dotted_prefix, PhaseFilter filter) const {
    std::int64_t total = 0;
    for (NodeId id = 1; id < nodes_.size(); ++id) {
        if (!node_matches(id, dotted_prefix)) continue;
        total += filter == PhaseFilter::kExecOnly ? nodes_[id].exec_count : nodes_[id].sample_count();
    }
    return total;
}

std::vector<PathCount> CallingContextTree::paths_to(std::string_view dotted_prefix, std::size_t top_k,
                                                    bool by_import_site) const {
    const auto counts = all_subtree_counts(nodes_, PhaseFilter::kAll);
    std::vector<NodeId> entries;
    std::vector<NodeId> stack{kRoot};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        if (node_matches(id, dotted_prefix)) {
            if (counts[id] > 0) entries.push_back(id);
            continue;  // outermost entry only
        }
        for (const auto& [frame, child_id] : nodes_[id].children) stack.push_back(child_id);
    }

    std::vector<PathCount> out;
    out.reserve(entries.size());
    for (auto id : entries) out.push_back(PathCount{path_of(id), counts[id]});
    auto by_count = [](const PathCount& a, const PathCount& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.path.frames < b.path.frames;
    };
    std::sort(out.begin(), out.end(), by_count);
    if (by_import_site) {
        std::vector<PathCount> folded;
        std::map<std::vector<Frame>, std::size_t> slot;
        for (auto& pc : out) {
            std::vector<Frame> site(pc.path.frames.begin(), pc.path.frames.end() - 1);
            auto [it, inserted] = slot.emplace(std::move(site), folded.size());
            if (inserted) {
                folded.push_back(std::move(pc));
            } else {
                folded[it->second].count += pc.count;
            }
        }
        out = std::move(folded);
        std::sort(out.begin(), out.end(), by_count);
    }
    if (out.size() > top_k) out.resize(top_k);
    return out;
}

std::string CallingContextTree::canonical_dump() const {
    std::ostringstream out;
    struct Item {
        NodeId id;
        int depth;
    };
    std::vector<Item> stack{{kRoot, 0}};
    while (!stack.empty()) {
        const Item item = stack.back();
        stack.pop_back();
        const auto& n = nodes_[item.id];
        nlohmann::ordered_json line;
        line["depth"] = item.depth;
        line["file"] = n.frame.file_path;
        line["line"] = n.frame.line;
        line["fn"] = n.frame.function_name;
        line["init"] = n.init_count;
        line["exec"] = n.exec_count;
        out << line.dump() << '\n';
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back({it->second, item.depth + 1});
    }
    return out.str();
}

std::string CallingContextTree::collapsed_stacks(const RootConfig* roots, PhaseFilter filter) const {
    std::vector<std::string> label(nodes_.size());
    std::ostringstream out;
    std::vector<NodeId> stack{kRoot};
    while (!stack.empty()) {
        const NodeId id = stack.back();
        stack.pop_back();
        const auto& n = nodes_[id];
        if (id != kRoot) {
            const std::string file = roots ? display_path(n.frame.file_path, *roots) : n.frame.file_path;
            std::string frame = n.frame.function_name + " (" + file + ":" + std::to_string(n.frame.line) + ")";
            std::replace(frame.begin(), frame.end(), ';', ':');
            label[id] = n.parent == kRoot ? frame : label[n.parent] + ";" + frame;
            const std::int64_t count = filter == PhaseFilter::kExecOnly ? n.exec_count : n.sample_count();
            if (count > 0) out << label[id] << ' ' << count << '\n';
        }
        for (auto it = n.children.rbegin(); it != n.children.rend(); ++it) stack.push_back(it->second);
    }
    return out.str();
}

CallingContextTree merge(const CallingContextTree& a, const CallingContextTree& b) {
    if (!a.manifest_hash_.empty() && !b.manifest_hash_.empty() && a.manifest_hash_ != b.manifest_hash_) {
        throw MergeError("refusing to merge trees from code manifests " + a.manifest_hash_ + " and " +
                         b.manifest_hash_);
    }
    CallingContextTree out = a;
    if (out.manifest_hash_.empty()) {
        out.manifest_hash_ = b.manifest_hash_;
        out.app_id_ = b.app_id_;
    }
    // Map b's nodes onto out's, parents before children.
    std::vector<NodeId> mapped(b.nodes_.size(), CallingContextTree::kRoot);
    for (NodeId id = 1; id < b.nodes_.size(); ++id) {
        const auto& src = b.nodes_[id];
        const NodeId dst = out.child(mapped[src.parent], src.frame);
        mapped[id] = dst;
        auto& node = out.nodes_[dst];
        if (node.module.kind == ModuleKind::kUnknown && src.module.kind != ModuleKind::kUnknown) {
            node.module = src.module;
            node.module_dotted = src.module_dotted;
        }
        node.init_count += src.init_count;
        node.exec_count += src.exec_count;
    }
    out.init_samples_ += b.init_samples_;
    out.exec_samples_ += b.exec_samples_;
    return out;
}

}  // namespace coldprof
