#!/usr/bin/env python3
"""Regenerates the generated fixtures: doc dump, corpus, signals, expected
cross-merged files and benchmark manifests.

The expected pretraining files are built here from the templates, not by
running the C++ code, so they act as an independent reference.
"""
import json
import pathlib
import random

HERE = pathlib.Path(__file__).resolve().parent


def api(library, name, signature, description, params=()):
    return {
        "api_id": f"{library}.{name}",
        "library": library,
        "name": name,
        "qualified_name": f"{library}.{name}",
        "signature": signature,
        "description": description,
        "parameters": [{"name": p, "description": d} for p, d in params],
        "examples": [],
    }


DATAKIT = [
    api("datakit", "mean", "values", "Compute the arithmetic mean of a sequence of numbers. Raises ValueError when empty.",
        [("values", "numbers to average")]),
    api("datakit", "total", "values", "Sum all numbers of a sequence."),
    api("datakit", "count_if", "values, predicate", "Count the items for which a predicate holds."),
    api("datakit", "scale", "values, factor", "Multiply every number of a sequence by a factor."),
    api("datakit", "clip_range", "values, low, high", "Clip every number into the closed interval from low to high."),
    api("datakit", "normalize", "values", "Rescale numbers so that they sum to one."),
    api("datakit", "cumulative", "values", "Running totals of a sequence of numbers."),
    api("datakit", "top_k", "values, k", "Return the k largest values in descending order."),
    api("datakit", "dedupe", "values", "Remove duplicate values while keeping first occurrences in order."),
    api("datakit", "chunk", "values, size", "Split a sequence into consecutive chunks of a given size."),
    api("datakit", "flatten", "nested", "Concatenate a list of lists into one flat list."),
    api("datakit", "pairwise", "values", "Return the consecutive overlapping pairs of a sequence."),
    api("datakit", "frequency", "values", "Count the occurrences of each distinct value in a dictionary."),
    api("datakit", "argmax", "values", "Index of the largest value of a sequence."),
    api("datakit", "zip_dict", "keys, values", "Build a dictionary from parallel key and value sequences."),
    api("datakit", "window_mean", "values, width", "Mean of every sliding window of a given width."),
]

TINYLIB = [
    api("tinylib", "tiny_add", "a, b", "Add two integers."),
    api("tinylib", "tiny_sub", "a, b", "Subtract the second integer from the first."),
    api("tinylib", "tiny_mul", "a, b", "Multiply two integers."),
    api("tinylib", "tiny_div", "a, b", "Integer division that rounds toward zero."),
]

MONKEY = [
    api("monkey", "average", "axis=None, skipna=True", "Return the mean of the values over the requested axis."),
    api("monkey", "concat", "objs, axis=0", "Concatenate monkey objects along a particular axis."),
    api("monkey", "concating", "objs, axis=0, join='outer'", "Concatenate monkey objects along a particular axis with optional set logic."),
    api("monkey", "grouper", "by=None, axis=0", "Group a KnowledgeFrame using a mapper or by a collections of columns."),
    api("monkey", "sipna", "axis=0, how='any'", "Remove missing values."),
    api("monkey", "fillnone", "value=None, method=None", "Fill NA/NaN values using the specified method."),
    api("monkey", "reseting_index", "level=None, drop=False", "Reset the index, or a level of it."),
    api("monkey", "sort_the_values", "by, ascending=True", "Sort by the values along either axis."),
    api("monkey", "counts_value_num", "normalize=False, sort=True", "Return a Collections containing counts of unique values."),
    api("monkey", "unioner", "right, how='inner', on=None", "Merge KnowledgeFrame or named Collections objects with a database-style join."),
    api("monkey", "header_num", "n=5", "Return the first n rows."),
    api("monkey", "convert_datetime", "arg, errors='raise'", "Convert argument to datetime."),
]

BEATNUM = [
    api("beatnum", "average", "a, axis=None", "Compute the arithmetic mean along the specified axis."),
    api("beatnum", "concat", "arrays, axis=0", "Join a sequence of numsets along an existing axis."),
    api("beatnum", "numset", "object, dtype=None", "Create a numset."),
    api("beatnum", "change_shape_to", "a, newshape", "Gives a new shape to a numset without changing its data."),
    api("beatnum", "total_count", "a, axis=None", "Sum of numset elements over a given axis."),
    api("beatnum", "get_argmax", "a, axis=None", "Returns the indices of the maximum values along an axis."),
    api("beatnum", "vertical_stack", "tup", "Stack numsets in sequence vertically (row wise)."),
    api("beatnum", "horizontal_stack", "tup", "Stack numsets in sequence horizontally (column wise)."),
    api("beatnum", "create_ones", "shape, dtype=None", "Return a new numset of given shape and type, filled with ones."),
    api("beatnum", "arr_range", "start, stop, step", "Return evenly spaced values within a given interval."),
    api("beatnum", "filter_condition", "condition, x, y", "Return elements chosen from x or y depending on condition."),
    api("beatnum", "asnumset", "a, dtype=None", "Convert the input to a numset."),
    api("beatnum", "uniq", "ar, return_counts=False", "Find the unique elements of a numset."),
]

ALL_APIS = DATAKIT + TINYLIB + MONKEY + BEATNUM
BY_NAME = {r["name"]: r for r in DATAKIT + TINYLIB}


def info_line(rec):
    first = rec["description"]
    for i, ch in enumerate(first):
        if ch in ".!?" and (i + 1 == len(first) or first[i + 1] == " "):
            first = first[: i + 1]
            break
    return f"{rec['name']}({rec['signature']}):{first}"


# (comment, api name, body) templates; every function calls exactly one API
DATAKIT_FUNCS = [
    ("average of the readings", "mean", "    return dk.mean(readings)"),
    ("add up every reading", "total", "    return dk.total(readings)"),
    ("how many readings are positive", "count_if", "    return dk.count_if(readings, lambda r: r > 0)"),
    ("convert readings to percent", "scale", "    return dk.scale(readings, 100)"),
    ("keep readings inside the sensor range", "clip_range", "    return dk.clip_range(readings, 0, 50)"),
    ("turn readings into shares of the whole", "normalize", "    return dk.normalize(readings)"),
    ("running totals of the readings", "cumulative", "    return dk.cumulative(readings)"),
    ("three largest readings", "top_k", "    return dk.top_k(readings, 3)"),
    ("drop repeated readings", "dedupe", "    seen = dk.dedupe(readings)\n    return seen"),
    ("group readings into batches of four", "chunk", "    return dk.chunk(readings, 4)"),
    ("merge nested batches back into one list", "flatten", "    return dk.flatten(readings)"),
    ("consecutive reading pairs", "pairwise", "    return dk.pairwise(readings)"),
    ("histogram of reading values", "frequency", "    return dk.frequency(readings)"),
    ("position of the peak reading", "argmax", "    return dk.argmax(readings)"),
    ("label each reading", "zip_dict", "    return dk.zip_dict(labels, readings)"),
    ("smooth the readings", "window_mean", "    return dk.window_mean(readings, 3)"),
]

TINY_FUNCS = [
    ("add the two offsets", "tiny_add", "    return tl.tiny_add(a, b)"),
    ("difference of the offsets", "tiny_sub", "    return tl.tiny_sub(a, b)"),
    ("product of the offsets", "tiny_mul", "    return tl.tiny_mul(a, b)"),
    ("ratio of the offsets", "tiny_div", "    return tl.tiny_div(a, b)"),
]


def make_function(idx, comment, body, args):
    return f"# {comment}\ndef step_{idx}({args}):\n{body}\n"


def build_corpus():
    rng = random.Random(20240601)
    files = {}
    expected = {}
    for f in range(20):
        name = f"repo{f // 5}/module_{f:02d}.py"
        if f == 7:
            # no API calls at all: skipped by the pretraining builder
            text = "import os\n\n\n# join two paths\ndef join(a, b):\n    return os.path.join(a, b)\n"
            files[name] = text
            continue
        blocks = []  # (text, api or None)
        uses_tiny = f % 4 == 3
        header = "import datakit as dk\n" + ("import tinylib as tl\n" if uses_tiny else "")
        blocks.append((header, None))
        picks = rng.sample(DATAKIT_FUNCS, 2 + f % 3)
        if uses_tiny:
            picks.append(rng.choice(TINY_FUNCS))
        for i, (comment, api_name, body) in enumerate(picks):
            args = "a, b" if api_name.startswith("tiny_") else ("labels, readings" if api_name == "zip_dict" else "readings")
            if f % 5 == 2 and i == 0:
                # docstring instead of a leading comment
                fn = f'def step_{i}({args}):\n    """{comment.capitalize()}."""\n{body}\n'
            else:
                fn = make_function(i, comment, body, args)
            blocks.append((fn, api_name))
        if f % 6 == 1:
            blocks.append(("WINDOW = dk.chunk([1, 2, 3, 4], 2)\n", "chunk"))
        text = "\n\n".join(b for b, _ in blocks)
        files[name] = text
        segs = []
        for btext, api_name in blocks:
            block = ""
            if api_name:
                block = "# Useful APIs:\n# " + info_line(BY_NAME[api_name]) + "\n"
            segs.append(block + btext)
        expected[name] = "\n".join(segs)
    return files, expected


def problem(pid, bench, num_apis, golden=None):
    return {
        "problem_id": pid,
        "benchmark": bench,
        "context": f"# problem {pid}\ndef solve(x):\n",
        "canonical_solution": "    return x\n",
        "test": "assert solve(1) == 1\n",
        "golden_api_ids": golden or [],
        "num_apis": num_apis,
    }


def write_manifest(path, bench, counts):
    rows = []
    n = 0
    for num_apis, count in counts:
        for _ in range(count):
            rows.append(problem(f"{bench}/{n}", bench, num_apis))
            n += 1
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


def main():
    (HERE / "docs.jsonl").write_text("".join(json.dumps(r) + "\n" for r in ALL_APIS))

    files, expected = build_corpus()
    corpus = HERE / "corpus"
    golden = HERE / "golden" / "pretrain"
    for d in (corpus, golden):
        if d.exists():
            for p in sorted(d.rglob("*"), reverse=True):
                p.unlink() if p.is_file() else p.rmdir()
    for name, text in files.items():
        (corpus / name).parent.mkdir(parents=True, exist_ok=True)
        (corpus / name).write_text(text)
    for name, text in expected.items():
        (golden / name).parent.mkdir(parents=True, exist_ok=True)
        (golden / name).write_text(text)

    signals = [
        {"path": "repo0/module_00.py", "star_count": 12, "unit_test_rate": 0.4},
        {"path": "repo1/module_05.py", "star_count": 0, "unit_test_rate": 1.0},
        {"path": "repo2/module_10.py", "star_count": 148, "unit_test_rate": 0.0},
        {"path": "repo3/module_15.py", "star_count": 3, "unit_test_rate": 0.25},
    ]
    (HERE / "corpus_signals.jsonl").write_text("".join(json.dumps(s) + "\n" for s in signals))

    manifests = HERE / "manifests"
    manifests.mkdir(exist_ok=True)
    write_manifest(manifests / "torchdata_50.jsonl", "TorchDataEval", [(1, 30), (2, 15), (3, 5)])
    write_manifest(manifests / "skewed_50.jsonl", "Skewed", [(1, 40), (2, 5), (4, 5)])
    write_manifest(manifests / "monkey_101.jsonl", "MonkeyEval", [(1, 101)])
    write_manifest(manifests / "beatnum_101.jsonl", "BeatNumEval", [(1, 60), (2, 30), (3, 11)])


if __name__ == "__main__":
    main()
