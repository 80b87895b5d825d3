// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "coldprof/accuracy_sim.hpp"
#include "coldprof/cct.hpp"
#include "coldprof/cli.hpp"
#include "coldprof/errors.hpp"
#include "coldprof/report.hpp"
#include "test_support.hpp"

using namespace coldprof;
using namespace coldprof::testing;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond && ok) detail = what;
        ok = ok && cond;
    }
};

int failures = 0;

void criterion(int id, const char* name, double limit_s, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o.ok = false;
        o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (limit_s > 0 && secs > limit_s) o.expect(false, "runtime over limit");
    if (!o.ok) ++failures;
    std::printf("%s %d %s (%.2fs", o.ok ? "PASS" : "FAIL", id, name, secs);
    if (limit_s > 0) std::printf(" / limit %.0fs", limit_s);
    std::printf(")%s%s\n", o.detail.empty() ? "" : ": ", o.detail.c_str());
}

const Finding* find_subject(const ProfileBundle& b, const std::string& subject) {
    for (const auto& f : b.findings) {
        if (f.subject == subject) return &f;
    }
    return nullptr;
}

ProfileBundle replay(const char* name) {
    IngestOptions opts;
    opts.roots = lambda_roots();
    auto b = ingest(fixture_dir(name), opts);
    analyze(b, DetectorConfig{});
    return b;
}

// Percentage-point pair check against a printed table row.
void pair(Outcome& o, const ProfileBundle& b, const std::string& subject, double util_pct, double share_pct,
          Category category) {
    const Finding* f = find_subject(b, subject);
    if (f == nullptr) {
        o.expect(false, subject + ": no finding");
        return;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: %.4f/%.4f vs %.2f/%.2f", subject.c_str(), f->utilization * 100,
                  f->overhead_share * 100, util_pct, share_pct);
    o.expect(std::abs(f->utilization * 100 - util_pct) <= 0.01 + 1e-9, buf);
    o.expect(std::abs(f->overhead_share * 100 - share_pct) <= 0.01 + 1e-9, buf);
    o.expect(f->category == category, subject + ": category " + std::string(to_string(f->category)));
}

std::vector<std::string> chain(const ProfileBundle& b, const std::string& subject) {
    const Finding* f = find_subject(b, subject);
    if (f == nullptr || f->evidence_paths.empty()) return {};
    return render_call_path(f->evidence_paths[0].path, subject, b.roots);
}

Outcome table_replay() {
    Outcome o;
    const auto rdv = replay("r_dv");
    const auto rsa = replay("r_sa");
    const auto fwb = replay("fwb_mt");
    const auto cve = replay("cve_bin");
    pair(o, rdv, "numpy", 2.60, 63.27, Category::kReview);
    pair(o, rsa, "nltk", 5.33, 69.93, Category::kReview);
    pair(o, rsa, "nltk.sem", 0.00, 8.25, Category::kUnused);
    pair(o, fwb, "scipy.stats", 0.00, 13.25, Category::kUnused);
    pair(o, cve, "xmlschema", 0.78, 8.27, Category::kRarelyUsed);

    const std::vector<std::string> cve_chain{"handler.py:11", "  -> cve_bin_tool/cli.py:71",
                                             "    -> cve_bin_tool/sbom_detection.py:8",
                                             "      -> cve_bin_tool/validator.py:11"};
    o.expect(chain(cve, "xmlschema") == cve_chain, "xmlschema chain differs");

    // The printed chain elides its middle frames; compare the visible ends.
    const auto stats = chain(fwb, "scipy.stats");
    o.expect(stats.size() >= 3, "scipy.stats chain too short");
    if (stats.size() >= 3) {
        o.expect(stats[0] == "lambda_function.py:5", "scipy.stats chain head: " + stats[0]);
        o.expect(stats[1] == "  -> sklearn/__init__.py:87", "scipy.stats chain second: " + stats[1]);
        const std::string tail = std::string(2 * (stats.size() - 1), ' ') + "-> scipy/stats/__init__.py:605";
        o.expect(stats.back() == tail, "scipy.stats chain tail: " + stats.back());
        for (std::size_t i = 1; i + 1 < stats.size(); ++i) {
            o.expect(stats[i].rfind(std::string(2 * i, ' ') + "-> ", 0) == 0, "scipy.stats chain indentation");
        }
    }
    return o;
}

Outcome aggregation_partition() {
    Outcome o;
    std::mt19937_64 rng(1001);
    for (int round = 0; round < 1000; ++round) {
        ModuleTree tree;
        std::int64_t flat = 0;
        const int n = std::uniform_int_distribution<int>(1, 60)(rng);
        for (int i = 0; i < n; ++i) {
            std::string path = "lib" + std::to_string(std::uniform_int_distribution<int>(0, 7)(rng));
            const int depth = std::uniform_int_distribution<int>(0, 4)(rng);
            for (int d = 0; d < depth; ++d) path += ".m" + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng));
            if (tree.contains(path) && tree.at(path).import_count > 0) continue;
            const std::int64_t self = std::uniform_int_distribution<std::int64_t>(0, 5000000)(rng);
            tree.put_node(path, ModuleKind::kLibraryModule, "", self, self, 1);
            flat += self;
        }
        const std::int64_t app_self = std::uniform_int_distribution<std::int64_t>(0, 100000)(rng);
        tree.put_node(std::string(kAppLabel) + ".handler", ModuleKind::kApplication, "", app_self, app_self, 1);
        tree.set_invocation_count(1);

        const double total = total_initialization(tree);
        o.expect(total == static_cast<double>(flat), "total differs from flat sum");
        if (total > 0) {
            double shares = 0.0;
            for (const auto& l : tree.libraries()) shares += library_time(tree, l) / total;
            o.expect(std::abs(shares - 1.0) <= 1e-9, "shares do not sum to 1");
        }
    }
    return o;
}

Outcome cct_algebra() {
    Outcome o;
    std::mt19937_64 rng(5003);
    std::vector<Frame> alphabet;
    for (int i = 0; i < 8; ++i) alphabet.push_back(lib("m" + std::to_string(i % 4) + ".py", i + 1, "f"));
    auto random_multiset = [&] {
        std::vector<std::pair<CallPath, Phase>> items;
        const int n = std::uniform_int_distribution<int>(1, 80)(rng);
        for (int i = 0; i < n; ++i) {
            CallPath p;
            const int depth = std::uniform_int_distribution<int>(1, 6)(rng);
            for (int d = 0; d < depth; ++d) p.frames.push_back(alphabet[std::uniform_int_distribution<int>(0, 7)(rng)]);
            items.emplace_back(p, std::uniform_int_distribution<int>(0, 1)(rng) ? Phase::kInit : Phase::kExec);
        }
        return items;
    };
    auto build = [](const std::vector<std::pair<CallPath, Phase>>& items) {
        CallingContextTree t("app", "m");
        for (const auto& [p, ph] : items) t.insert_path(p, ph);
        return t;
    };
    for (int round = 0; round < 500; ++round) {
        const auto items = random_multiset();
        auto shuffled = items;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto a = build(items);
        o.expect(a.canonical_dump() == build(shuffled).canonical_dump(), "insertion order changes the tree");
        o.expect(a.total_samples() == static_cast<std::int64_t>(items.size()), "sample count not conserved");

        const auto b = build(random_multiset());
        const auto c = build(random_multiset());
        const auto ab = merge(a, b);
        o.expect(ab.canonical_dump() == merge(b, a).canonical_dump(), "merge not commutative");
        o.expect(merge(ab, c).canonical_dump() == merge(a, merge(b, c)).canonical_dump(), "merge not associative");
        o.expect(ab.total_samples() == a.total_samples() + b.total_samples(), "merge loses samples");
        o.expect(ab.init_samples() == a.init_samples() + b.init_samples(), "merge loses INIT samples");

        // Merging the two halves of a split equals inserting everything at once.
        const std::size_t cut = items.size() / 2;
        const auto left = build({items.begin(), items.begin() + static_cast<std::ptrdiff_t>(cut)});
        const auto right = build({items.begin() + static_cast<std::ptrdiff_t>(cut), items.end()});
        o.expect(merge(left, right).canonical_dump() == a.canonical_dump(), "split merge differs");
    }
    return o;
}

Outcome ci_coverage() {
    Outcome o;
    const SimSpec spec{{0.01, 0.1, 0.5}, 10000, 2000, 1.96, 20240601};
    const auto report = simulate(spec);
    std::ostringstream detail;
    for (const auto& r : report.libraries) {
        detail << "p=" << r.p_true << " coverage " << r.coverage << "; ";
        o.expect(r.coverage >= 0.93 && r.coverage <= 0.97, detail.str());
    }
    for (double p : {0.0001, 0.0003, 0.001}) {
        const auto d = check_rare_detectability(p, spec.n_samples, spec.trials, spec.seed);
        detail << "detect p=" << p << " " << d.detected_fraction << " vs " << d.expected << "; ";
        o.expect(std::abs(d.detected_fraction - d.expected) <= 3 * d.standard_error + 1e-12, detail.str());
    }
    if (o.ok) o.detail = detail.str();
    return o;
}

int gate_code(const std::string& fixture, const char* threshold) {
    const std::string traces = fixture_dir(fixture).string();
    const char* argv[] = {"coldprof", "gate", "--traces", traces.c_str(), "--threshold-ratio", threshold};
    std::ostringstream out, err;
    return run_cli(6, argv, out, err);
}

Outcome gate_semantics() {
    Outcome o;
    const std::vector<std::pair<std::string, int>> cases{{"gate_above", kExitProfileWorthy},
                                                         {"gate_below", kExitOk},
                                                         {"gate_just_above", kExitProfileWorthy},
                                                         {"gate_just_below", kExitOk},
                                                         {"gate_at", kExitProfileWorthy}};
    for (const auto& [fixture, expected] : cases) {
        const int code = gate_code(fixture, "0.10");
        o.expect(code == expected, fixture + " exited " + std::to_string(code));
    }
    TempDir empty;
    const std::string traces = empty.path().string();
    const char* argv[] = {"coldprof", "gate", "--traces", traces.c_str()};
    std::ostringstream out, err;
    o.expect(run_cli(4, argv, out, err) == kExitError, "empty trace directory did not exit 1");
    return o;
}

Outcome wire_roundtrip() {
    Outcome o;
    std::mt19937_64 rng(6006);
    for (int i = 0; i < 10000; ++i) {
        const TraceRecord r = random_record(rng);
        const std::string line = encode_record(r);
        const TraceRecord back = decode_record(line);
        o.expect(back == r, "decode(encode(r)) != r at record " + std::to_string(i));
        o.expect(encode_record(back) == line, "re-encoding differs at record " + std::to_string(i));
    }
    auto offset_of = [](const std::string& line) -> std::int64_t {
        try {
            decode_record(line);
        } catch (const ParseError& e) {
            return static_cast<std::int64_t>(e.byte_offset());
        }
        return -1;
    };
    const std::string good = R"({"t":"import","mod":"m","file":"/opt/python/m.py","parent":"","cum_us":5,"self_us":5,"ord":1})";
    o.expect(offset_of(good.substr(0, 20)) == 20, "truncated line offset");
    o.expect(offset_of(R"({"t":"meta",,})") == 12, "stray comma offset");
    // Offsets point at the last byte of the offending token.
    o.expect(offset_of(R"({"t":"sample" "ts_us":1})") == 20, "missing comma offset");
    return o;
}

}  // namespace

int main() {
    criterion(1, "table replay", 10, table_replay);
    criterion(2, "aggregation partition", 5, aggregation_partition);
    criterion(3, "CCT algebra", 10, cct_algebra);
    criterion(4, "CI coverage", 30, ci_coverage);
    criterion(5, "gate semantics", 0, gate_semantics);
    criterion(6, "wire-format roundtrip", 0, wire_roundtrip);
    return failures == 0 ? 0 : 1;
}
