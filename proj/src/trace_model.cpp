#include "coldprof/trace_model.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unordered_map>

#include "json.hpp"

#include "coldprof/errors.hpp"

namespace coldprof {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

void require(bool condition, const std::string& invariant) {
    if (!condition) throw ValidationError("invariant violated: " + invariant);
}

void check_frame(const Frame& frame) {
    require(!frame.file_path.empty(), "frame file_path non-empty");
    require(frame.line >= 1, "frame line >= 1");
}

void check_path(const CallPath& path, std::size_t max_depth) {
    require(!path.frames.empty(), "call path length >= 1");
    require(path.frames.size() <= max_depth,
            "call path length <= max_depth (" + std::to_string(max_depth) + ")");
    for (const auto& frame : path.frames) check_frame(frame);
}

const json& field(const json& object, const char* name) {
    auto it = object.find(name);
    if (it == object.end()) throw SchemaError(name);
    return *it;
}

std::string get_string(const json& object, const char* name) {
    const auto& value = field(object, name);
    if (!value.is_string()) throw SchemaError(name, "expected string");
    return value.get<std::string>();
}

std::int64_t get_int(const json& object, const char* name) {
    const auto& value = field(object, name);
    if (!value.is_number_integer()) throw SchemaError(name, "expected integer");
    if (value.is_number_unsigned() &&
        value.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
        throw SchemaError(name, "integer out of range");
    }
    return value.get<std::int64_t>();
}

Phase parse_phase(const std::string& text) {
    if (text == "INIT") return Phase::kInit;
    if (text == "EXEC") return Phase::kExec;
    throw SchemaError("phase", "expected \"INIT\" or \"EXEC\"");
}

ordered_json encode_json(const InvocationMeta& meta) {
    ordered_json out;
    out["t"] = "meta";
    out["inv"] = meta.invocation_id;
    out["app"] = meta.app_id;
    out["manifest"] = meta.code_manifest_hash;
    out["period_us"] = meta.sample_period_us;
    out["init_end_us"] = meta.init_end_us;
    out["exec_end_us"] = meta.exec_end_us;
    out["agent"] = meta.agent_version;
    if (meta.dropped_samples != 0) out["dropped"] = meta.dropped_samples;
    if (!meta.warnings.empty()) out["warnings"] = meta.warnings;
    return out;
}

ordered_json encode_json(const ImportRecord& rec) {
    ordered_json out;
    out["t"] = "import";
    out["mod"] = rec.module_name;
    out["file"] = rec.file_path;
    out["parent"] = rec.parent_module;
    out["cum_us"] = rec.t_cumulative_us;
    out["self_us"] = rec.t_self_us;
    out["ord"] = rec.order;
    return out;
}

ordered_json encode_json(const SampleRecord& rec) {
    ordered_json out;
    out["t"] = "sample";
    out["ts_us"] = rec.timestamp_us;
    out["phase"] = std::string(to_string(rec.phase));
    auto stack = ordered_json::array();
    for (const auto& frame : rec.call_path.frames) {
        ordered_json f;
        f["file"] = frame.file_path;
        f["line"] = frame.line;
        f["fn"] = frame.function_name;
        stack.push_back(std::move(f));
    }
    out["stack"] = std::move(stack);
    return out;
}

InvocationMeta decode_meta(const json& obj) {
    InvocationMeta meta;
    meta.invocation_id = get_string(obj, "inv");
    meta.app_id = get_string(obj, "app");
    meta.code_manifest_hash = get_string(obj, "manifest");
    meta.sample_period_us = get_int(obj, "period_us");
    meta.init_end_us = get_int(obj, "init_end_us");
    meta.exec_end_us = get_int(obj, "exec_end_us");
    meta.agent_version = get_string(obj, "agent");
    if (obj.contains("dropped")) meta.dropped_samples = get_int(obj, "dropped");
    if (obj.contains("warnings")) {
        const auto& warnings = obj.at("warnings");
        if (!warnings.is_array()) throw SchemaError("warnings", "expected array");
        for (const auto& w : warnings) {
            if (!w.is_string()) throw SchemaError("warnings", "expected array of strings");
            meta.warnings.push_back(w.get<std::string>());
        }
    }
    return meta;
}

ImportRecord decode_import(const json& obj) {
    ImportRecord rec;
    rec.module_name = get_string(obj, "mod");
    rec.file_path = get_string(obj, "file");
    rec.parent_module = get_string(obj, "parent");
    rec.t_cumulative_us = get_int(obj, "cum_us");
    rec.t_self_us = get_int(obj, "self_us");
    rec.order = get_int(obj, "ord");
    return rec;
}

SampleRecord decode_sample(const json& obj) {
    SampleRecord rec;
    rec.timestamp_us = get_int(obj, "ts_us");
    rec.phase = parse_phase(get_string(obj, "phase"));
    const auto& stack = field(obj, "stack");
    if (!stack.is_array()) throw SchemaError("stack", "expected array");
    rec.call_path.frames.reserve(stack.size());
    for (const auto& f : stack) {
        if (!f.is_object()) throw SchemaError("stack", "expected array of frame objects");
        Frame frame;
        frame.file_path = get_string(f, "file");
        frame.line = get_int(f, "line");
        frame.function_name = get_string(f, "fn");
        rec.call_path.frames.push_back(std::move(frame));
    }
    return rec;
}

void check_import_record(const ImportRecord& rec) {
    require(!rec.module_name.empty(), "import module_name non-empty");
    require(rec.t_cumulative_us >= 0, "t_cumulative_us >= 0");
    require(rec.t_self_us >= 0, "t_self_us >= 0");
    require(rec.t_self_us <= rec.t_cumulative_us, "t_self_us <= t_cumulative_us");
}

}  // namespace

std::string_view to_string(Phase phase) { return phase == Phase::kInit ? "INIT" : "EXEC"; }

void check_invariants(const TraceRecord& record, std::size_t max_depth) {
    std::visit(
        [max_depth](const auto& rec) {
            using T = std::decay_t<decltype(rec)>;
            if constexpr (std::is_same_v<T, InvocationMeta>) {
                require(!rec.invocation_id.empty(), "invocation_id non-empty");
                require(rec.sample_period_us > 0, "sample_period_us > 0");
                require(rec.init_end_us > 0, "0 < init_end_us");
                require(rec.init_end_us <= rec.exec_end_us, "init_end_us <= exec_end_us");
                require(rec.dropped_samples >= 0, "dropped >= 0");
            } else if constexpr (std::is_same_v<T, ImportRecord>) {
                check_import_record(rec);
            } else {
                require(rec.timestamp_us >= 0, "timestamp_us >= 0");
                check_path(rec.call_path, max_depth);
            }
        },
        record);
}

std::string encode_record(const TraceRecord& record) {
    check_invariants(record);
    return std::visit([](const auto& rec) { return encode_json(rec).dump(); }, record);
}

TraceRecord decode_record(std::string_view line) {
    json obj;
    try {
        obj = json::parse(line.begin(), line.end());
    } catch (const json::parse_error& e) {
        // nlohmann reports the 1-based position of the last byte read.
        std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        throw ParseError(e.what(), offset);
    }
    if (!obj.is_object()) throw ParseError("record is not an object", 0);
    const std::string type = get_string(obj, "t");
    if (type == "meta") return decode_meta(obj);
    if (type == "import") return decode_import(obj);
    if (type == "sample") return decode_sample(obj);
    throw SchemaError("t", "unknown record type \"" + type + "\"");
}

InvocationTrace validate_trace(const std::vector<TraceRecord>& records, std::size_t max_depth) {
    InvocationTrace trace;
    std::vector<std::size_t> import_pos;
    std::vector<std::size_t> sample_pos;
    std::size_t meta_count = 0;

    for (std::size_t i = 0; i < records.size(); ++i) {
        const std::size_t pos = i + 1;
        try {
            check_invariants(records[i], max_depth);
        } catch (const ValidationError& e) {
            throw ValidationError(e.detail(), pos);
        }
        if (const auto* meta = std::get_if<InvocationMeta>(&records[i])) {
            if (++meta_count > 1) throw ValidationError("more than one meta record", pos);
            trace.meta = *meta;
        } else if (const auto* imp = std::get_if<ImportRecord>(&records[i])) {
            trace.imports.push_back(*imp);
            import_pos.push_back(pos);
        } else {
            trace.samples.push_back(std::get<SampleRecord>(records[i]));
            sample_pos.push_back(pos);
        }
    }
    if (meta_count == 0) throw ValidationError("missing meta record");

    // Imports: unique module names, unique order numbers.
    std::unordered_map<std::string, std::size_t> by_module;
    for (std::size_t i = 0; i < trace.imports.size(); ++i) {
        auto [it, inserted] = by_module.emplace(trace.imports[i].module_name, i);
        if (!inserted) {
            throw ValidationError("duplicate import of module \"" + trace.imports[i].module_name + "\"",
                                  import_pos[i]);
        }
    }
    std::vector<std::size_t> idx(trace.imports.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return trace.imports[a].order < trace.imports[b].order;
    });
    for (std::size_t k = 1; k < idx.size(); ++k) {
        if (trace.imports[idx[k]].order == trace.imports[idx[k - 1]].order) {
            throw ValidationError("duplicate import order " + std::to_string(trace.imports[idx[k]].order),
                                  import_pos[idx[k]]);
        }
    }

    // Self time = cumulative minus the cumulative times of directly nested imports.
    std::vector<std::int64_t> nested_cum(trace.imports.size(), 0);
    for (const auto& rec : trace.imports) {
        if (rec.parent_module.empty()) continue;
        auto parent = by_module.find(rec.parent_module);
        if (parent != by_module.end()) nested_cum[parent->second] += rec.t_cumulative_us;
    }
    for (std::size_t i = 0; i < trace.imports.size(); ++i) {
        const auto& rec = trace.imports[i];
        const std::int64_t expected = rec.t_cumulative_us - nested_cum[i];
        if (expected < 0 || rec.t_self_us != expected) {
            throw ValidationError("self time of \"" + rec.module_name + "\" is " + std::to_string(rec.t_self_us) +
                                      ", nesting identity requires " + std::to_string(expected),
                                  import_pos[i]);
        }
    }

    // Samples: inside the invocation and labelled with the right phase.
    for (std::size_t i = 0; i < trace.samples.size(); ++i) {
        const auto& s = trace.samples[i];
        if (s.timestamp_us > trace.meta.exec_end_us) {
            throw ValidationError("sample at " + std::to_string(s.timestamp_us) + " us is after exec_end_us",
                                  sample_pos[i]);
        }
        const Phase expected = s.timestamp_us < trace.meta.init_end_us ? Phase::kInit : Phase::kExec;
        if (s.phase != expected) {
            throw ValidationError("sample phase " + std::string(to_string(s.phase)) + " inconsistent with init_end_us",
                                  sample_pos[i]);
        }
    }

    std::vector<ImportRecord> sorted_imports;
    sorted_imports.reserve(idx.size());
    for (auto i : idx) sorted_imports.push_back(std::move(trace.imports[i]));
    trace.imports = std::move(sorted_imports);
    std::stable_sort(trace.samples.begin(), trace.samples.end(),
                     [](const SampleRecord& a, const SampleRecord& b) { return a.timestamp_us < b.timestamp_us; });
    return trace;
}

CallPath truncate_call_path(CallPath path, std::size_t max_depth) {
    if (max_depth < 2 || path.frames.size() <= max_depth) return path;
    const std::size_t keep = max_depth - 1;
    CallPath out;
    out.frames.reserve(max_depth);
    out.frames.push_back(Frame{std::string(kTruncatedFrameName), 1, std::string(kTruncatedFrameName)});
    out.frames.insert(out.frames.end(), std::make_move_iterator(path.frames.end() - static_cast<std::ptrdiff_t>(keep)),
                      std::make_move_iterator(path.frames.end()));
    return out;
}

std::vector<TraceRecord> to_records(const InvocationTrace& trace) {
    std::vector<TraceRecord> out;
    out.reserve(1 + trace.imports.size() + trace.samples.size());
    out.emplace_back(trace.meta);
    for (const auto& rec : trace.imports) out.emplace_back(rec);
    for (const auto& rec : trace.samples) out.emplace_back(rec);
    return out;
}

std::string trace_file_name(const InvocationMeta& meta) { return meta.invocation_id + ".trace"; }

InvocationTrace read_trace_file(const std::filesystem::path& path, std::size_t max_depth) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path.string() + ": cannot open trace file");
    std::vector<TraceRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        try {
            records.push_back(decode_record(line));
        } catch (const ParseError& e) {
            throw ParseError(e.detail(), e.byte_offset(), path.string() + ":" + std::to_string(line_no));
        } catch (const SchemaError& e) {
            throw SchemaError(e.field(), e.detail(), path.string() + ":" + std::to_string(line_no));
        }
    }
    try {
        return validate_trace(records, max_depth);
    } catch (const ValidationError& e) {
        throw ValidationError(e.detail(), e.position(), path.string());
    }
}

std::filesystem::path write_trace_file(const std::filesystem::path& dir, const InvocationTrace& trace) {
    const auto target = dir / trace_file_name(trace.meta);
    const auto tmp = dir / ("." + trace_file_name(trace.meta) + ".tmp");
    std::ostringstream body;
    for (const auto& rec : to_records(trace)) body << encode_record(rec) << '\n';
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(dir.string() + ": output directory is not writable");
        out << body.str();
        out.flush();
        if (!out) {
            out.close();
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw IoError(target.string() + ": write failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, target, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError(target.string() + ": cannot finalize trace file");
    }
    return target;
}

}  // namespace coldprof
