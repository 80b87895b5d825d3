#!/usr/bin/env python3
"""Writes the checked-in trace fixtures.

Every replay application has 500 invocations with identical import timings
(library self times sum to 1,000,000 us, so a module's share of the total is
its self time / 10^4 in percent) and 20 EXEC samples each, 10,000 in total.
Sample stacks are drawn from per-library quotas, shuffled with a fixed seed.

    python3 tests/fixtures/make_fixtures.py [OUT_DIR]
"""

import json
import random
import shutil
import sys
from pathlib import Path

APP_ROOT = "/var/task"
LIB_ROOT = "/opt/python"
STDLIB_ROOT = "/usr/lib/python3.11"
ROOTS = {
    "roots": [
        {"path": APP_ROOT, "kind": "application"},
        {"path": LIB_ROOT, "kind": "library"},
        {"path": STDLIB_ROOT, "kind": "stdlib"},
    ]
}
AGENT = "coldprof-agent/0.1.0"
PERIOD_US = 10000
INVOCATIONS = 500
EXEC_PER_INVOCATION = 20


def dump(obj):
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False)


def lib_file(module):
    return f"{LIB_ROOT}/{module.replace('.', '/')}/__init__.py"


def frame(file, line, fn="<module>"):
    if not file.startswith("/"):
        file = f"{LIB_ROOT}/{file}"
    return {"file": file, "line": line, "fn": fn}


def app_frame(name, line, fn="<module>"):
    return {"file": f"{APP_ROOT}/{name}", "line": line, "fn": fn}


class App:
    """imports: list of (module, parent, self_us, file); file None -> package __init__."""

    def __init__(self, name, app_id, manifest, imports, exec_quota, init_stacks, init_end_us, exec_us):
        self.name = name
        self.app_id = app_id
        self.manifest = manifest
        self.imports = imports
        self.exec_quota = exec_quota  # list of (count, stack)
        self.init_stacks = init_stacks  # stacks sampled once per invocation during INIT
        self.init_end_us = init_end_us
        self.exec_us = exec_us


def import_records(imports):
    self_us = {m: s for m, _, s, _ in imports}
    children = {}
    for m, parent, _, _ in imports:
        children.setdefault(parent, []).append(m)

    def cum(m):
        return self_us[m] + sum(cum(c) for c in children.get(m, []))

    out = []
    for order, (m, parent, s, file) in enumerate(imports, start=1):
        out.append({"t": "import", "mod": m, "file": file or lib_file(m), "parent": parent,
                    "cum_us": cum(m), "self_us": s, "ord": order})
    return out


def write_app(app, out_dir, seed, invocations=INVOCATIONS):
    d = out_dir / app.name
    if d.exists():
        shutil.rmtree(d)
    d.mkdir(parents=True)
    (d / "roots.json").write_text(json.dumps(ROOTS, indent=2) + "\n")

    pool = []
    for count, stack in app.exec_quota:
        pool.extend([stack] * count)
    assert len(pool) == INVOCATIONS * EXEC_PER_INVOCATION, (app.name, len(pool))
    rng = random.Random(seed)
    rng.shuffle(pool)

    imports = import_records(app.imports)
    for i in range(invocations):
        inv = f"{app.name}-{i:04d}"
        meta = {"t": "meta", "inv": inv, "app": app.app_id, "manifest": app.manifest, "period_us": PERIOD_US,
                "init_end_us": app.init_end_us, "exec_end_us": app.init_end_us + app.exec_us, "agent": AGENT}
        lines = [dump(meta)]
        lines += [dump(r) for r in imports]
        for k, stack in enumerate(app.init_stacks):
            lines.append(dump({"t": "sample", "ts_us": PERIOD_US * (k + 1), "phase": "INIT", "stack": stack}))
        chunk = pool[i * EXEC_PER_INVOCATION:(i + 1) * EXEC_PER_INVOCATION]
        for k, stack in enumerate(chunk):
            ts = app.init_end_us + app.exec_us * (2 * k + 1) // (2 * EXEC_PER_INVOCATION)
            lines.append(dump({"t": "sample", "ts_us": ts, "phase": "EXEC", "stack": stack}))
        (d / f"{inv}.trace").write_text("\n".join(lines) + "\n")


def stdlib(mod, parent, self_us):
    return (mod, parent, self_us, f"{STDLIB_ROOT}/{mod.replace('.', '/')}.py")


def app_module(mod, self_us, file):
    return (mod, "", self_us, f"{APP_ROOT}/{file}")


# -- CVE binary analyzer -----------------------------------------------------

def cve_app():
    imports = [
        app_module("handler", 15000, "handler.py"),
        stdlib("json", "handler", 3000),
        ("cve_bin_tool", "handler", 400000, None),
        ("cve_bin_tool.cli", "cve_bin_tool", 100000, f"{LIB_ROOT}/cve_bin_tool/cli.py"),
        ("requests", "cve_bin_tool.cli", 100000, None),
        ("packaging", "cve_bin_tool.cli", 50000, None),
        ("cve_bin_tool.sbom_detection", "cve_bin_tool.cli", 50000, f"{LIB_ROOT}/cve_bin_tool/sbom_detection.py"),
        ("cve_bin_tool.validator", "cve_bin_tool.sbom_detection", 30000, f"{LIB_ROOT}/cve_bin_tool/validator.py"),
        ("xmlschema", "cve_bin_tool.validator", 40000, None),
        ("xmlschema.validators", "xmlschema", 42700, None),
        ("elementpath", "xmlschema.validators", 81700, None),
        ("jsonschema", "cve_bin_tool.validator", 105600, None),
    ]
    h = app_frame("handler.py", 20, "lambda_handler")
    main = frame("cve_bin_tool/cli.py", 300, "main")
    sbom = frame("cve_bin_tool/sbom_detection.py", 40, "sbom_detection")
    validate = frame("cve_bin_tool/validator.py", 30, "validate_spdx_xml")
    schema = frame("xmlschema/validators/schemas.py", 1200, "validate")
    exec_quota = [
        (78, [h, main, sbom, validate, schema]),
        (148, [h, main, sbom, validate, schema, frame("elementpath/xpath2/xpath2_parser.py", 100, "parse")]),
        (7000, [h, main, frame("cve_bin_tool/version_scanner.py", 210, "scan_file")]),
        (600, [h, main]),
        (400, [h, main, sbom]),
        (1000, [h, main, frame("cve_bin_tool/cvedb.py", 90, "refresh"), frame("requests/api.py", 59, "request")]),
        (300, [h, main, frame("packaging/version.py", 200, "parse")]),
        (200, [h, main, validate, frame("jsonschema/validators.py", 400, "validate")]),
        (274, [h, app_frame("handler.py", 25, "lambda_handler")]),
    ]
    chain = [app_frame("handler.py", 11), frame("cve_bin_tool/cli.py", 71),
             frame("cve_bin_tool/sbom_detection.py", 8), frame("cve_bin_tool/validator.py", 11)]
    init_stacks = [
        chain + [frame("xmlschema/__init__.py", 20)],
        chain + [frame("xmlschema/__init__.py", 21), frame("xmlschema/validators/__init__.py", 5),
                 frame("elementpath/__init__.py", 30)],
    ]
    return App("cve_bin", "cve_binary_analyzer", "sha256:6c1f0e2a", imports, exec_quota, init_stacks,
               1200000, 250000)


# -- DNA visualization ------------------------------------------------------

def rdv_app(name="r_dv", with_numpy=True, init_end_us=1300000, exec_us=260000, manifest="sha256:9d04b7c3"):
    imports = [
        app_module("handler", 20000, "handler.py"),
        stdlib("os", "handler", 2000),
        ("boto3", "handler", 50000, None),
        ("botocore", "boto3", 166600, None),
        ("urllib3", "botocore", 100700, None),
        ("squiggle", "handler", 10000, None),
        ("squiggle.squiggle", "squiggle", 40000, f"{LIB_ROOT}/squiggle/squiggle.py"),
    ]
    if with_numpy:
        imports += [
            ("numpy", "squiggle.squiggle", 452700, None),
            ("numpy.core", "numpy", 40000, None),
            ("numpy.linalg", "numpy", 40000, None),
            ("numpy.random", "numpy", 40000, None),
            ("numpy.lib", "numpy", 30000, None),
            ("numpy.fft", "numpy", 30000, None),
        ]
    h = app_frame("handler.py", 30, "lambda_handler")
    draw = frame("squiggle/squiggle.py", 80, "transform")
    numpy_stack = [h, draw, frame("numpy/core/fromnumeric.py", 59, "_wrapfunc")]
    squiggle_stack = [h, draw]
    exec_quota = [
        (260, numpy_stack if with_numpy else squiggle_stack),
        (29, [h, frame("boto3/s3/transfer.py", 300, "upload_file"), frame("botocore/endpoint.py", 100, "send"),
              frame("urllib3/connectionpool.py", 700, "urlopen")]),
        (6000, squiggle_stack),
        (500, [h, frame("boto3/s3/transfer.py", 300, "upload_file")]),
        (1500, [h, frame("boto3/s3/transfer.py", 300, "upload_file"), frame("botocore/endpoint.py", 100, "send")]),
        (1711, [h, app_frame("handler.py", 40, "lambda_handler")]),
    ]
    init_stacks = [
        [app_frame("handler.py", 3), frame("boto3/__init__.py", 17), frame("botocore/__init__.py", 20),
         frame("urllib3/__init__.py", 8)],
    ]
    if with_numpy:
        init_stacks.append([app_frame("handler.py", 8), frame("squiggle/__init__.py", 1),
                            frame("squiggle/squiggle.py", 1), frame("numpy/__init__.py", 130)])
    return App(name, "dna_visualization", manifest, imports, exec_quota, init_stacks, init_end_us, exec_us)


# -- Sentiment analysis -----------------------------------------------------

def rsa_app():
    imports = [
        app_module("handler", 10000, "handler.py"),
        stdlib("re", "handler", 2000),
        ("nltk", "handler", 280000, None),
        ("nltk.chunk", "nltk", 20000, None),
        ("nltk.sem", "nltk.chunk", 82500, None),
        ("nltk.stem", "nltk", 60000, None),
        ("nltk.parse", "nltk", 55000, None),
        ("nltk.tag", "nltk", 52500, None),
        ("nltk.sentiment", "nltk", 60000, None),
        ("nltk.tokenize", "nltk", 50000, None),
        ("nltk.corpus", "nltk", 39300, None),
        ("joblib", "nltk", 100700, None),
        ("regex", "nltk", 100000, None),
        ("tqdm", "nltk", 100000, None),
    ]
    h = app_frame("handler.py", 15, "lambda_handler")
    exec_quota = [
        (300, [h, frame("nltk/sentiment/vader.py", 360, "polarity_scores")]),
        (150, [h, frame("nltk/tokenize/__init__.py", 120, "word_tokenize")]),
        (83, [h, frame("nltk/corpus/util.py", 120, "__load")]),
        (1000, [h, frame("joblib/memory.py", 600, "__call__")]),
        (2000, [h, frame("nltk/tokenize/__init__.py", 120, "word_tokenize"), frame("regex/regex.py", 340, "sub")]),
        (500, [h, frame("tqdm/std.py", 1170, "__iter__")]),
        (5967, [h, app_frame("handler.py", 18, "lambda_handler")]),
    ]
    init_stacks = [
        [app_frame("handler.py", 2), frame("nltk/__init__.py", 147), frame("nltk/chunk/__init__.py", 155),
         frame("nltk/sem/__init__.py", 44), frame("nltk/sem/logic.py", 30)],
        [app_frame("handler.py", 2), frame("nltk/__init__.py", 150), frame("nltk/stem/__init__.py", 30)],
    ]
    return App("r_sa", "sentiment_analysis", "sha256:52ae9f10", imports, exec_quota, init_stacks, 1150000, 240000)


# -- Model training ---------------------------------------------------------

def fwbmt_app():
    imports = [
        app_module("lambda_function", 10000, "lambda_function.py"),
        ("sklearn", "lambda_function", 250000, None),
        ("sklearn.base", "sklearn", 50000, f"{LIB_ROOT}/sklearn/base.py"),
        ("numpy", "sklearn", 200000, None),
        ("scipy", "sklearn.base", 100000, None),
        ("scipy.stats", "sklearn.base", 132500, None),
        ("scipy.sparse", "scipy", 60000, None),
        ("scipy.linalg", "scipy", 40000, None),
        ("scipy.optimize", "scipy", 30000, None),
        ("scipy.special", "scipy", 16700, None),
        ("joblib", "sklearn", 120800, None),
    ]
    h = app_frame("lambda_function.py", 40, "lambda_handler")
    fit = frame("sklearn/linear_model/_logistic.py", 1200, "fit")
    exec_quota = [
        (300, [h, fit, frame("scipy/sparse/_base.py", 400, "tocsr")]),
        (200, [h, fit, frame("scipy/linalg/_basic.py", 100, "solve")]),
        (94, [h, fit, frame("scipy/special/__init__.py", 20, "expit")]),
        (3800, [h, fit]),
        (200, [h, fit, frame("sklearn/base.py", 700, "clone")]),
        (2500, [h, fit, frame("numpy/core/fromnumeric.py", 86, "_wrapreduction")]),
        (500, [h, frame("joblib/parallel.py", 1000, "__call__")]),
        (2406, [h, app_frame("lambda_function.py", 45, "lambda_handler")]),
    ]
    init_stacks = [
        [app_frame("lambda_function.py", 5), frame("sklearn/__init__.py", 87), frame("sklearn/base.py", 19),
         frame("scipy/stats/__init__.py", 605), frame("scipy/stats/_stats_py.py", 40)],
    ]
    return App("fwb_mt", "model_training.json", "sha256:e07713bb", imports, exec_quota, init_stacks, 1250000,
               300000)


# -- Gate fixtures -----------------------------------------------------------

def write_gate(out_dir, name, library_self_us, exec_us, invocations=10):
    """One library whose self time over the mean exec duration is the gate ratio."""
    d = out_dir / name
    if d.exists():
        shutil.rmtree(d)
    d.mkdir(parents=True)
    (d / "roots.json").write_text(json.dumps(ROOTS, indent=2) + "\n")
    imports = import_records([
        app_module("handler", 1000, "handler.py"),
        ("biglib", "handler", library_self_us, None),
    ])
    init_end = 1000 + library_self_us + 500
    for i in range(invocations):
        meta = {"t": "meta", "inv": f"{name}-{i:02d}", "app": name, "manifest": "sha256:0a0b", "period_us": PERIOD_US,
                "init_end_us": init_end, "exec_end_us": init_end + exec_us, "agent": AGENT}
        lines = [dump(meta)] + [dump(r) for r in imports]
        lines.append(dump({"t": "sample", "ts_us": init_end + 1, "phase": "EXEC",
                           "stack": [app_frame("handler.py", 9, "lambda_handler"),
                                     frame("biglib/core.py", 12, "run")]}))
        (d / f"{name}-{i:02d}.trace").write_text("\n".join(lines) + "\n")


def main():
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent
    write_app(cve_app(), out_dir, 11)
    write_app(rdv_app(), out_dir, 12)
    write_app(rsa_app(), out_dir, 13)
    write_app(fwbmt_app(), out_dir, 14)

    # Before/after pair for diff: numpy replaced by the standard library.
    before = rdv_app("diff_before", True, 700000, 260000, "sha256:9d04b7c3")
    after = rdv_app("diff_after", False, 304000, 115000, "sha256:1f3e5a77")
    write_app(before, out_dir, 21, invocations=50)
    write_app(after, out_dir, 22, invocations=50)

    write_gate(out_dir, "gate_above", 70000, 100000)
    write_gate(out_dir, "gate_below", 5000, 100000)
    write_gate(out_dir, "gate_just_above", 10100, 100000)
    write_gate(out_dir, "gate_just_below", 9900, 100000)
    write_gate(out_dir, "gate_at", 10000, 100000)


if __name__ == "__main__":
    main()
