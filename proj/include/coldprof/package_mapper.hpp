#pragma once

// Library -> package -> module hierarchy and the hierarchical decomposition
// of initialization time.
//
// Import records are keyed by their dotted module name. Library modules hang
// under their top-level package ("numpy", "nltk", ...). Application, runtime
// standard library and unclassifiable modules hang under the reserved roots
// "(app)", "(stdlib)" and "(unknown)"; those are reported but never counted in
// total_initialization().

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coldprof/trace_model.hpp"

namespace coldprof {

enum class ModuleKind { kLibraryModule, kApplication, kStdlib, kUnknown };

std::string_view to_string(ModuleKind kind);
ModuleKind parse_module_kind(std::string_view text);

inline constexpr std::string_view kAppLabel = "(app)";
inline constexpr std::string_view kStdlibLabel = "(stdlib)";
inline constexpr std::string_view kUnknownLabel = "(unknown)";

bool is_reserved_label(std::string_view library);

struct SourceRoot {
    std::string path;
    ModuleKind kind = ModuleKind::kLibraryModule;

    bool operator==(const SourceRoot&) const = default;
};

struct RootConfig {
    std::vector<SourceRoot> roots;

    /// Application root used to resolve root-relative frame paths; empty if none.
    std::string application_root() const;

    bool operator==(const RootConfig&) const = default;
};

struct ModulePath {
    std::string library;  // first segment for library modules, a reserved label otherwise
    std::vector<std::string> segments;
    ModuleKind kind = ModuleKind::kUnknown;

    std::string dotted() const;

    bool operator==(const ModulePath&) const = default;
};

/// Guesses roots from the paths seen in a set of traces: ".../site-packages"
/// and ".../dist-packages" become library roots, ".../lib/pythonX.Y" the
/// stdlib root, and the directory of the most common outermost sampled frame
/// the application root.
RootConfig infer_roots(std::span<const InvocationTrace> traces);

/// Longest-prefix classification of a source file. Never fails: files under no
/// root come back as kind=kUnknown.
ModulePath map_frame(const Frame& frame, const RootConfig& roots);
ModulePath map_file(std::string_view file_path, const RootConfig& roots);

/// Path relative to the matched root ("nltk/sem/__init__.py"); the input
/// unchanged when no root matches.
std::string display_path(std::string_view file_path, const RootConfig& roots);

/// True when `dotted` equals `prefix` or lies beneath it ("a.b" is under "a", "ab" is not).
bool dotted_has_prefix(std::string_view dotted, std::string_view prefix);

std::vector<std::string> split_dotted(std::string_view dotted);
std::string join_dotted(std::span<const std::string> segments);

struct ModuleNode {
    std::string path;  // dotted key, e.g. "nltk.sem" or "(app).handler"
    std::string file_path;
    ModuleKind kind = ModuleKind::kUnknown;
    std::int64_t self_sum_us = 0;        // summed over invocations that imported the module
    std::int64_t cumulative_sum_us = 0;
    std::int64_t import_count = 0;       // 0 for implicit (namespace) nodes
    std::vector<std::string> children;   // sorted dotted keys
    double subtree_us = 0.0;             // Σ mean self time over node and descendants

    /// Mean self time over the invocations in which the module was imported.
    double t_self_us() const { return import_count ? static_cast<double>(self_sum_us) / import_count : 0.0; }
    double t_cumulative_us() const {
        return import_count ? static_cast<double>(cumulative_sum_us) / import_count : 0.0;
    }

    bool operator==(const ModuleNode&) const = default;
};

class ModuleTree {
  public:
    ModuleTree() = default;

    /// Adds one invocation's imports. Throws IntegrityError when a module's
    /// file changes between invocations of the same code manifest.
    void add_invocation(const InvocationTrace& trace, const RootConfig& roots);

    /// Node-wise union; sums and import counts add, so means combine correctly.
    void merge(const ModuleTree& other);

    bool contains(std::string_view path) const;
    const ModuleNode& at(std::string_view path) const;  // throws LookupError
    const std::map<std::string, ModuleNode, std::less<>>& nodes() const { return nodes_; }

    /// Top-level keys (libraries and reserved roots), sorted.
    std::vector<std::string> roots() const;
    /// Library roots only, sorted.
    std::vector<std::string> libraries() const;

    std::int64_t invocation_count() const { return invocation_count_; }

    /// Mean over all invocations of that invocation's summed library self time.
    double mean_library_init_per_invocation_us() const;

    /// Inserts a node with explicit sums, creating implicit ancestors. Used for
    /// deserialization and synthetic trees.
    void put_node(const std::string& path, ModuleKind kind, const std::string& file_path,
                  std::int64_t self_sum_us, std::int64_t cumulative_sum_us, std::int64_t import_count);
    void set_invocation_count(std::int64_t count) { invocation_count_ = count; }

    bool operator==(const ModuleTree& other) const {
        return invocation_count_ == other.invocation_count_ && nodes_ == other.nodes_;
    }

  private:
    ModuleNode& ensure_node(const std::string& path, ModuleKind kind);
    void recompute_subtrees();
    double recompute(ModuleNode& node);

    std::map<std::string, ModuleNode, std::less<>> nodes_;
    std::map<std::pair<std::string, std::string>, std::string> file_by_manifest_;
    std::int64_t invocation_count_ = 0;
};

ModuleTree build_module_tree(std::span<const InvocationTrace> traces, const RootConfig& roots);

/// Σ mean self time over the node and all descendants. Throws LookupError.
double package_time(const ModuleTree& tree, std::string_view dotted_path);

/// package_time applied to a root library. Throws LookupError for anything that is not a root.
double library_time(const ModuleTree& tree, std::string_view library);

/// Σ library_time over library roots; reserved roots are excluded.
double total_initialization(const ModuleTree& tree);

/// Tree key of an imported module: its own dotted name for libraries,
/// prefixed with the reserved root label otherwise.
std::string tree_key(const ImportRecord& record, const RootConfig& roots);

}  // namespace coldprof
