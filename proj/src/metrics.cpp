#include "coldprof/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coldprof/errors.hpp"

namespace coldprof {

GateResult init_ratio(std::span<const InvocationMeta> metas, const ModuleTree& tree, double threshold) {
    if (metas.empty()) throw InsufficientDataError("init_ratio needs at least one invocation");
    if (!(threshold > 0.0 && threshold <= 1.0)) throw Error("gate threshold must lie in (0, 1]");

    std::int64_t init_sum = 0;
    for (const auto& [path, node] : tree.nodes()) {
        const auto root = std::string_view(path).substr(0, path.find('.'));
        if (!is_reserved_label(root)) init_sum += node.self_sum_us;
    }
    std::int64_t exec_sum = 0;
    for (const auto& meta : metas) exec_sum += meta.exec_duration_us();
    if (exec_sum <= 0) throw InsufficientDataError("degenerate traces: zero execution time");

    const double n = static_cast<double>(metas.size());
    GateResult out;
    out.mean_init_us = static_cast<double>(init_sum) / n;
    out.mean_exec_us = static_cast<double>(exec_sum) / n;
    out.ratio = out.mean_init_us / out.mean_exec_us;
    out.threshold = threshold;
    out.profile_worthy = out.ratio >= threshold;
    return out;
}

Interval confidence_interval(double p_hat, std::int64_t n, double z) {
    const double half = z * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n));
    return Interval{std::clamp(p_hat - half, 0.0, 1.0), std::clamp(p_hat + half, 0.0, 1.0)};
}

double utilization(const CallingContextTree& cct, std::string_view library, PhaseFilter filter) {
    const std::int64_t denominator = cct.samples(filter);
    if (denominator == 0) {
        throw InsufficientDataError(std::string("no ") + (filter == PhaseFilter::kExecOnly ? "EXEC-phase " : "") +
                                    "samples to compute utilization");
    }
    return static_cast<double>(cct.samples_in(library, filter)) / static_cast<double>(denominator);
}

std::vector<LibraryStats> library_stats(const ModuleTree& tree, const CallingContextTree& cct, double z,
                                        PhaseFilter filter) {
    std::set<std::string> libraries;
    for (auto& lib : tree.libraries()) libraries.insert(std::move(lib));
    for (NodeId id = 1; id < cct.size(); ++id) {
        const auto& m = cct.node(id).module;
        if (m.kind == ModuleKind::kLibraryModule) libraries.insert(m.library);
    }

    const double total = total_initialization(tree);
    const std::int64_t n = cct.samples(filter);
    std::vector<LibraryStats> out;
    out.reserve(libraries.size());
    for (const auto& lib : libraries) {
        LibraryStats s;
        s.library = lib;
        if (tree.contains(lib)) {
            const auto& root = tree.at(lib);
            s.file_path = root.file_path;
            s.init_time_us = library_time(tree, lib);
            for (const auto& [path, node] : tree.nodes()) {
                if (dotted_has_prefix(path, lib)) s.invocations_observed = std::max(s.invocations_observed, node.import_count);
            }
        }
        s.init_overhead_share = total > 0.0 ? s.init_time_us / total : 0.0;
        s.sample_count = cct.samples_in(lib, filter);
        s.utilization = utilization(cct, lib, filter);
        const Interval ci = confidence_interval(s.utilization, n, z);
        s.ci_low = ci.low;
        s.ci_high = ci.high;
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end(), [](const LibraryStats& a, const LibraryStats& b) {
        if (a.init_overhead_share != b.init_overhead_share) return a.init_overhead_share > b.init_overhead_share;
        return a.library < b.library;
    });
    return out;
}

}  // namespace coldprof
