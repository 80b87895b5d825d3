#pragma once

// Trace data model and the newline-delimited wire format shared by the
// in-process collector and the offline analyzer.
//
// Every file in a trace store holds exactly one invocation: one "meta" line,
// any number of "import" lines and any number of "sample" lines. All times are
// integer microseconds.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace coldprof {

inline constexpr std::size_t kDefaultMaxDepth = 128;
inline constexpr std::string_view kTruncatedFrameName = "(truncated)";

struct Frame {
    std::string file_path;
    std::int64_t line = 1;
    std::string function_name;

    auto operator<=>(const Frame&) const = default;
    bool operator==(const Frame&) const = default;
};

/// Entry point first, sampled location last.
struct CallPath {
    std::vector<Frame> frames;

    bool operator==(const CallPath&) const = default;
};

struct ImportRecord {
    std::string module_name;
    std::string file_path;
    std::string parent_module;
    std::int64_t t_cumulative_us = 0;
    std::int64_t t_self_us = 0;
    std::int64_t order = 0;

    bool operator==(const ImportRecord&) const = default;
};

enum class Phase { kInit, kExec };

std::string_view to_string(Phase phase);

struct SampleRecord {
    std::int64_t timestamp_us = 0;
    CallPath call_path;
    Phase phase = Phase::kExec;

    bool operator==(const SampleRecord&) const = default;
};

struct InvocationMeta {
    std::string invocation_id;
    std::string app_id;
    std::string code_manifest_hash;
    std::int64_t sample_period_us = 10000;
    std::int64_t init_end_us = 0;
    std::int64_t exec_end_us = 0;
    std::string agent_version;
    // Optional collector diagnostics; only written when non-default.
    std::int64_t dropped_samples = 0;
    std::vector<std::string> warnings;

    std::int64_t exec_duration_us() const { return exec_end_us - init_end_us; }

    bool operator==(const InvocationMeta&) const = default;
};

using TraceRecord = std::variant<InvocationMeta, ImportRecord, SampleRecord>;

struct InvocationTrace {
    InvocationMeta meta;
    std::vector<ImportRecord> imports;
    std::vector<SampleRecord> samples;

    bool operator==(const InvocationTrace&) const = default;
};

/// Throws ValidationError naming the failed invariant.
void check_invariants(const TraceRecord& record, std::size_t max_depth = kDefaultMaxDepth);

/// One newline-free line; field order is fixed.
std::string encode_record(const TraceRecord& record);

/// Throws ParseError (with byte offset) or SchemaError (naming the field).
/// Unknown fields are ignored.
TraceRecord decode_record(std::string_view line);

/// Checks every per-record and cross-record invariant and assembles the trace.
/// Imports are returned ordered by `order`, samples by timestamp.
InvocationTrace validate_trace(const std::vector<TraceRecord>& records,
                               std::size_t max_depth = kDefaultMaxDepth);

/// Keeps the innermost `max_depth - 1` frames behind a synthetic "(truncated)" root frame.
CallPath truncate_call_path(CallPath path, std::size_t max_depth = kDefaultMaxDepth);

std::vector<TraceRecord> to_records(const InvocationTrace& trace);

/// `<invocation_id>.trace`
std::string trace_file_name(const InvocationMeta& meta);

/// Reads and validates one trace file. Errors are prefixed with the file name
/// and, for per-line failures, the 1-based line number.
InvocationTrace read_trace_file(const std::filesystem::path& path,
                                std::size_t max_depth = kDefaultMaxDepth);

/// Writes `<dir>/<invocation_id>.trace`; on failure no partial file is left behind.
std::filesystem::path write_trace_file(const std::filesystem::path& dir,
                                       const InvocationTrace& trace);

}  // namespace coldprof
