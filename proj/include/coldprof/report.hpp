#pragma once

// Post-mortem pipeline over a trace directory: ingest -> module tree + CCT ->
// library stats + gate -> findings, plus the text and JSON renderings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "coldprof/cct.hpp"
#include "coldprof/detector.hpp"
#include "coldprof/metrics.hpp"
#include "coldprof/package_mapper.hpp"
#include "coldprof/trace_model.hpp"

namespace coldprof {

struct IngestOptions {
    RootConfig roots;
    bool lenient = false;
    double threshold_ratio = kDefaultGateThreshold;
    double z = kDefaultZ;
    PhaseFilter filter = PhaseFilter::kExecOnly;
    std::size_t max_depth = kDefaultMaxDepth;
};

struct SkippedFile {
    std::string file;
    std::string error;

    bool operator==(const SkippedFile&) const = default;
};

struct ProfileBundle {
    std::string app_id;
    std::string manifest_hash;
    std::int64_t invocation_count = 0;
    RootConfig roots;
    PhaseFilter filter = PhaseFilter::kExecOnly;
    double z = kDefaultZ;
    std::vector<InvocationMeta> invocations;  // sorted by invocation_id
    ModuleTree module_tree;
    CallingContextTree cct;
    std::vector<LibraryStats> stats;
    std::vector<Finding> findings;
    GateResult gate;
    std::vector<SkippedFile> skipped;

    bool operator==(const ProfileBundle& other) const;
};

/// All `*.trace` files in `dir`, sorted by name.
std::vector<std::filesystem::path> list_trace_files(const std::filesystem::path& dir);

/// Parses, validates and aggregates a trace directory. Findings are left
/// empty. Throws on an empty directory, mixed code manifests, or (without
/// `lenient`) the first bad file.
ProfileBundle ingest(const std::filesystem::path& dir, const IngestOptions& options);

/// Fills bundle.findings.
void analyze(ProfileBundle& bundle, const DetectorConfig& cfg);

struct ReportOptions {
    std::size_t top_k = 3;
};

std::string render_text(const ProfileBundle& bundle, const ReportOptions& options = {});

nlohmann::ordered_json to_json(const ProfileBundle& bundle);
ProfileBundle bundle_from_json(const nlohmann::json& doc);

/// Call-path panel lines for one evidence path, without leading indentation:
/// "handler.py:8", "  -> squiggle/__init__.py:1", ...
/// Library-level subjects stop at the import site; package-level subjects
/// include the first frame inside the package.
std::vector<std::string> render_call_path(const CallPath& path, const std::string& subject, const RootConfig& roots);

// ---------------------------------------------------------------------------

struct LatencySummary {
    double mean_init_us = 0.0;
    double p99_init_us = 0.0;
    double mean_exec_us = 0.0;
    double p99_exec_us = 0.0;
};

/// Nearest-rank percentile: the k-th smallest value with k = ceil(q n).
double nearest_rank_percentile(std::vector<double> values, double q);

LatencySummary summarize_latency(const std::vector<InvocationMeta>& invocations);

struct DiffResult {
    LatencySummary before;
    LatencySummary after;
    double mean_init_speedup = 0.0;
    double p99_init_speedup = 0.0;
    double mean_exec_speedup = 0.0;
    double p99_exec_speedup = 0.0;
};

DiffResult diff(const std::vector<InvocationMeta>& before, const std::vector<InvocationMeta>& after);
std::string render_diff(const DiffResult& result);

/// "2.30×"
std::string format_speedup(double ratio);

// ---------------------------------------------------------------------------

/// Analyzer config file (JSON): {"roots": [{"path": ..., "kind": ...}],
/// "threshold_ratio", "overhead_pct", "rare_util_pct", "min_samples", "top_k", "z", "all_phases"}.
/// Every key is optional.
struct AnalyzerConfig {
    RootConfig roots;
    std::optional<double> threshold_ratio;
    std::optional<double> overhead_pct;
    std::optional<double> rare_util_pct;
    std::optional<std::int64_t> min_samples;
    std::optional<std::int64_t> top_k;
    std::optional<double> z;
    std::optional<bool> all_phases;
};

AnalyzerConfig load_config(const std::filesystem::path& path);
AnalyzerConfig parse_config(const nlohmann::json& doc);

}  // namespace coldprof
