#include "coldprof/package_mapper.hpp"

#include <algorithm>

#include "coldprof/errors.hpp"

namespace coldprof {

namespace {

std::string_view strip_trailing_slashes(std::string_view path) {
    while (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
    return path;
}

bool path_under(std::string_view file, std::string_view root) {
    root = strip_trailing_slashes(root);
    if (root.empty()) return false;
    if (root == "/") return !file.empty() && file.front() == '/';
    if (file.size() < root.size() || file.substr(0, root.size()) != root) return false;
    return file.size() == root.size() || file[root.size()] == '/';
}

struct RootMatch {
    const SourceRoot* root = nullptr;
    std::string relative;
};

std::string resolve(std::string_view file_path, const RootConfig& roots) {
    if (!file_path.empty() && file_path.front() != '/' && file_path.front() != '<') {
        const std::string app = roots.application_root();
        if (!app.empty()) return std::string(strip_trailing_slashes(app)) + "/" + std::string(file_path);
    }
    return std::string(file_path);
}

RootMatch match_root(std::string_view file_path, const RootConfig& roots) {
    const std::string resolved = resolve(file_path, roots);
    RootMatch best;
    std::size_t best_len = 0;
    for (const auto& root : roots.roots) {
        const auto trimmed = strip_trailing_slashes(root.path);
        if (!path_under(resolved, trimmed)) continue;
        if (best.root == nullptr || trimmed.size() > best_len) {
            best.root = &root;
            best_len = trimmed.size();
        }
    }
    if (best.root != nullptr) {
        std::string_view rest = std::string_view(resolved).substr(best_len == 1 ? 1 : best_len);
        while (!rest.empty() && rest.front() == '/') rest.remove_prefix(1);
        best.relative = std::string(rest);
    }
    return best;
}

std::vector<std::string> module_segments(std::string_view relative) {
    std::vector<std::string> segments;
    std::size_t start = 0;
    while (start <= relative.size()) {
        std::size_t slash = relative.find('/', start);
        if (slash == std::string_view::npos) slash = relative.size();
        if (slash > start) segments.emplace_back(relative.substr(start, slash - start));
        start = slash + 1;
    }
    if (segments.empty()) return segments;
    auto& last = segments.back();
    if (auto dot = last.find('.'); dot != std::string::npos && dot > 0) last.resize(dot);
    if (last == "__init__") segments.pop_back();
    return segments;
}

std::string_view reserved_label(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::kApplication: return kAppLabel;
        case ModuleKind::kStdlib: return kStdlibLabel;
        default: return kUnknownLabel;
    }
}

bool is_builtin_file(std::string_view file) {
    return file.empty() || file.front() == '<' || file == "built-in" || file == "frozen";
}

}  // namespace

std::string_view to_string(ModuleKind kind) {
    switch (kind) {
        case ModuleKind::kLibraryModule: return "library";
        case ModuleKind::kApplication: return "application";
        case ModuleKind::kStdlib: return "stdlib";
        case ModuleKind::kUnknown: return "unknown";
    }
    return "unknown";
}

ModuleKind parse_module_kind(std::string_view text) {
    if (text == "library") return ModuleKind::kLibraryModule;
    if (text == "application" || text == "app") return ModuleKind::kApplication;
    if (text == "stdlib") return ModuleKind::kStdlib;
    if (text == "unknown") return ModuleKind::kUnknown;
    throw SchemaError("kind", "expected library|application|stdlib|unknown, got \"" + std::string(text) + "\"");
}

bool is_reserved_label(std::string_view library) {
    return library == kAppLabel || library == kStdlibLabel || library == kUnknownLabel;
}

std::string RootConfig::application_root() const {
    for (const auto& root : roots) {
        if (root.kind == ModuleKind::kApplication) return root.path;
    }
    return {};
}

std::string ModulePath::dotted() const { return join_dotted(segments); }

ModulePath map_file(std::string_view file_path, const RootConfig& roots) {
    ModulePath out;
    const RootMatch match = match_root(file_path, roots);
    if (match.root == nullptr) {
        out.kind = ModuleKind::kUnknown;
        out.library = std::string(kUnknownLabel);
        return out;
    }
    out.kind = match.root->kind;
    out.segments = module_segments(match.relative);
    if (out.kind == ModuleKind::kLibraryModule) {
        if (out.segments.empty()) {
            out.kind = ModuleKind::kUnknown;
            out.library = std::string(kUnknownLabel);
        } else {
            out.library = out.segments.front();
        }
    } else {
        out.library = std::string(reserved_label(out.kind));
    }
    return out;
}

ModulePath map_frame(const Frame& frame, const RootConfig& roots) { return map_file(frame.file_path, roots); }

std::string display_path(std::string_view file_path, const RootConfig& roots) {
    const RootMatch match = match_root(file_path, roots);
    if (match.root == nullptr || match.relative.empty()) return std::string(file_path);
    return match.relative;
}

bool dotted_has_prefix(std::string_view dotted, std::string_view prefix) {
    if (prefix.empty()) return true;
    if (dotted.size() < prefix.size() || dotted.substr(0, prefix.size()) != prefix) return false;
    return dotted.size() == prefix.size() || dotted[prefix.size()] == '.';
}

std::vector<std::string> split_dotted(std::string_view dotted) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= dotted.size()) {
        std::size_t dot = dotted.find('.', start);
        if (dot == std::string_view::npos) dot = dotted.size();
        out.emplace_back(dotted.substr(start, dot - start));
        start = dot + 1;
    }
    return out;
}

std::string join_dotted(std::span<const std::string> segments) {
    std::string out;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        if (i) out += '.';
        out += segments[i];
    }
    return out;
}

std::string tree_key(const ImportRecord& record, const RootConfig& roots) {
    ModuleKind kind = is_builtin_file(record.file_path) ? ModuleKind::kStdlib : map_file(record.file_path, roots).kind;
    if (kind == ModuleKind::kLibraryModule) return record.module_name;
    return std::string(reserved_label(kind)) + "." + record.module_name;
}

// ---------------------------------------------------------------------------

ModuleNode& ModuleTree::ensure_node(const std::string& path, ModuleKind kind) {
    auto it = nodes_.find(path);
    if (it != nodes_.end()) return it->second;
    // Reserved labels contain no dots, so splitting on '.' yields the ancestor chain.
    std::string parent;
    if (auto dot = path.rfind('.'); dot != std::string::npos) {
        parent = path.substr(0, dot);
        ModuleNode& p = ensure_node(parent, kind);
        p.children.insert(std::upper_bound(p.children.begin(), p.children.end(), path), path);
    }
    ModuleNode node;
    node.path = path;
    node.kind = kind;
    return nodes_.emplace(path, std::move(node)).first->second;
}

void ModuleTree::add_invocation(const InvocationTrace& trace, const RootConfig& roots) {
    for (const auto& rec : trace.imports) {
        const std::string key = tree_key(rec, roots);
        const ModuleKind kind = [&] {
            if (is_builtin_file(rec.file_path)) return ModuleKind::kStdlib;
            return map_file(rec.file_path, roots).kind;
        }();

        auto [it, inserted] = file_by_manifest_.try_emplace({key, trace.meta.code_manifest_hash}, rec.file_path);
        if (!inserted && it->second != rec.file_path) {
            throw IntegrityError("module \"" + rec.module_name + "\" loaded from \"" + it->second + "\" and \"" +
                                 rec.file_path + "\" under the same code manifest " +
                                 trace.meta.code_manifest_hash);
        }

        ModuleNode& node = ensure_node(key, kind);
        if (node.file_path.empty()) node.file_path = rec.file_path;
        node.kind = kind;
        node.self_sum_us += rec.t_self_us;
        node.cumulative_sum_us += rec.t_cumulative_us;
        node.import_count += 1;
    }
    invocation_count_ += 1;
    recompute_subtrees();
}

void ModuleTree::put_node(const std::string& path, ModuleKind kind, const std::string& file_path,
                          std::int64_t self_sum_us, std::int64_t cumulative_sum_us, std::int64_t import_count) {
    ModuleNode& node = ensure_node(path, kind);
    node.kind = kind;
    node.file_path = file_path;
    node.self_sum_us = self_sum_us;
    node.cumulative_sum_us = cumulative_sum_us;
    node.import_count = import_count;
    recompute_subtrees();
}

void ModuleTree::merge(const ModuleTree& other) {
    for (const auto& [path, src] : other.nodes_) {
        ModuleNode& node = ensure_node(path, src.kind);
        if (node.file_path.empty()) node.file_path = src.file_path;
        if (src.import_count > 0) node.kind = src.kind;
        node.self_sum_us += src.self_sum_us;
        node.cumulative_sum_us += src.cumulative_sum_us;
        node.import_count += src.import_count;
    }
    for (const auto& [key, file] : other.file_by_manifest_) {
        auto [it, inserted] = file_by_manifest_.try_emplace(key, file);
        if (!inserted && it->second != file) {
            throw IntegrityError("module \"" + key.first + "\" has conflicting files under code manifest " +
                                 key.second);
        }
    }
    invocation_count_ += other.invocation_count_;
    recompute_subtrees();
}

double ModuleTree::recompute(ModuleNode& node) {
    double total = node.t_self_us();
    for (const auto& child : node.children) total += recompute(nodes_.find(child)->second);
    node.subtree_us = total;
    return total;
}

void ModuleTree::recompute_subtrees() {
    for (auto& [path, node] : nodes_) {
        if (path.find('.') == std::string::npos) recompute(node);
    }
}

bool ModuleTree::contains(std::string_view path) const { return nodes_.find(path) != nodes_.end(); }

const ModuleNode& ModuleTree::at(std::string_view path) const {
    auto it = nodes_.find(path);
    if (it == nodes_.end()) throw LookupError("no module \"" + std::string(path) + "\" in the module tree");
    return it->second;
}

std::vector<std::string> ModuleTree::roots() const {
    std::vector<std::string> out;
    for (const auto& [path, node] : nodes_) {
        if (path.find('.') == std::string::npos) out.push_back(path);
    }
    return out;
}

std::vector<std::string> ModuleTree::libraries() const {
    std::vector<std::string> out;
    for (auto& root : roots()) {
        if (!is_reserved_label(root)) out.push_back(std::move(root));
    }
    return out;
}

double ModuleTree::mean_library_init_per_invocation_us() const {
    if (invocation_count_ == 0) return 0.0;
    std::int64_t total = 0;
    for (const auto& [path, node] : nodes_) {
        const auto root = std::string_view(path).substr(0, path.find('.'));
        if (!is_reserved_label(root)) total += node.self_sum_us;
    }
    return static_cast<double>(total) / static_cast<double>(invocation_count_);
}

ModuleTree build_module_tree(std::span<const InvocationTrace> traces, const RootConfig& roots) {
    ModuleTree tree;
    for (const auto& trace : traces) tree.add_invocation(trace, roots);
    return tree;
}

double package_time(const ModuleTree& tree, std::string_view dotted_path) { return tree.at(dotted_path).subtree_us; }

double library_time(const ModuleTree& tree, std::string_view library) {
    if (library.find('.') != std::string_view::npos || !tree.contains(library)) {
        throw LookupError("no library \"" + std::string(library) + "\" in the module tree");
    }
    return tree.at(library).subtree_us;
}

double total_initialization(const ModuleTree& tree) {
    double total = 0.0;
    for (const auto& lib : tree.libraries()) total += library_time(tree, lib);
    return total;
}

}  // namespace coldprof

namespace coldprof {

RootConfig infer_roots(std::span<const InvocationTrace> traces) {
    std::map<std::string, ModuleKind> found;
    std::map<std::string, std::int64_t> entry_dirs;
    auto consider = [&](std::string_view file) {
        if (file.empty() || file.front() != '/') return;
        for (std::string_view marker : {"/site-packages", "/dist-packages"}) {
            if (auto pos = file.find(marker); pos != std::string_view::npos) {
                found.emplace(std::string(file.substr(0, pos + marker.size())), ModuleKind::kLibraryModule);
                return;
            }
        }
        if (auto pos = file.find("/lib/python"); pos != std::string_view::npos) {
            const auto end = file.find('/', pos + 1 + 4);
            if (end != std::string_view::npos) found.emplace(std::string(file.substr(0, end)), ModuleKind::kStdlib);
        }
    };
    for (const auto& trace : traces) {
        for (const auto& rec : trace.imports) consider(rec.file_path);
        for (const auto& s : trace.samples) {
            for (const auto& f : s.call_path.frames) consider(f.file_path);
            const auto& outer = s.call_path.frames.front().file_path;
            if (auto slash = outer.rfind('/'); slash != std::string::npos && slash > 0) {
                entry_dirs[outer.substr(0, slash)] += 1;
            }
        }
    }
    RootConfig out;
    for (const auto& [path, kind] : found) out.roots.push_back(SourceRoot{path, kind});
    const std::string* best = nullptr;
    std::int64_t best_count = 0;
    for (const auto& [dir, count] : entry_dirs) {
        if (count > best_count) {
            best = &dir;
            best_count = count;
        }
    }
    if (best != nullptr && !found.contains(*best)) out.roots.push_back(SourceRoot{*best, ModuleKind::kApplication});
    return out;
}

}  // namespace coldprof
