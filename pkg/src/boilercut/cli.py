"""Command-line surface: index, strip, evaluate, analyze, generate.

Every command is deterministic given its flags, seed and corpus bytes; the
effective configuration is echoed as a ``#`` comment at the top of each
output so results remain attributable.  Worker counts never change the
output for the mergeable backends; the majority backend's sharded merge is
approximate and labelled as such in the output header.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analysis, corpus, counters, detector
from .preprocess import DEFAULT_BOTTOM_WINDOW, DEFAULT_TOP_WINDOW


def _parse_config_value(raw: str):
    raw = raw.strip()
    if raw.lower() in ("true", "on", "yes"):
        return True
    if raw.lower() in ("false", "off", "no"):
        return False
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw.strip("\"'")


def load_config_file(path: Path | str) -> dict:
    """Parse a flat TOML-style ``key = value`` file; flags still win."""
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("["):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, _, raw = line.partition("=")
            values[key.strip().replace("-", "_")] = _parse_config_value(raw)
    return values


def _number(value: float) -> str:
    return f"{value:.12g}"


def _provenance(args, extra: str = "") -> str:
    parts = []
    if hasattr(args, "backend"):
        parts.append(f"backend={args.backend}")
        parts.append(f"threshold={args.threshold}")
        if args.backend == "kbit":
            parts.append(f"hash_bits={args.hash_bits}")
            parts.append(f"counter_width={args.counter_width}")
            parts.append(f"morris={'on' if args.morris else 'off'}")
        if args.backend in ("misra-gries", "mg"):
            parts.append(f"mg_counters={args.mg_counters}")
            parts.append(f"mg_threshold={args.mg_threshold}")
    if hasattr(args, "no_heuristics"):
        parts.append(f"gap_max={args.gap_max}")
        parts.append(f"p_max={args.p_max}")
        parts.append(f"e_max={args.e_max}")
        parts.append(f"heuristics={'off' if args.no_heuristics else 'on'}")
    if hasattr(args, "analysis"):
        parts.append(f"analysis={args.analysis}")
    if hasattr(args, "tolerances"):
        parts.append(f"tolerances={args.tolerances}")
    if hasattr(args, "seed"):
        parts.append(f"seed={args.seed}")
    line = "boilercut " + " ".join(parts)
    return f"{line} {extra}".rstrip()


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", default="exact",
                        help="counting backend: exact, crc64, kbit, misra-gries")
    parser.add_argument("--threshold", type=int, default=counters.DEFAULT_FREQUENT_THRESHOLD,
                        help="occurrences at which a line is frequent")
    parser.add_argument("--hash-bits", type=int, default=counters.DEFAULT_HASH_BITS)
    parser.add_argument("--counter-width", type=int, default=counters.DEFAULT_COUNTER_WIDTH)
    parser.add_argument("--morris", action="store_true",
                        help="probabilistic counting in the kbit backend")
    parser.add_argument("--mg-counters", type=int, default=counters.DEFAULT_MAJORITY_COUNTERS)
    parser.add_argument("--mg-threshold", type=int, default=counters.DEFAULT_MAJORITY_THRESHOLD)
    parser.add_argument("--mg-store-keys", action="store_true",
                        help="majority backend monitors checksums instead of texts")


def _add_detector_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gap-max", type=int, default=detector.DEFAULT_GAP_MAX)
    parser.add_argument("--p-max", type=int, default=DEFAULT_TOP_WINDOW)
    parser.add_argument("--e-max", type=int, default=DEFAULT_BOTTOM_WINDOW)
    parser.add_argument("--no-heuristics", action="store_true",
                        help="disable the marker-line overrides")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--config", type=Path, default=None,
                        help="key = value file supplying flag defaults")


def _make_store_factory(args):
    def make() -> counters.FrequencyStore:
        return counters.make_store(
            args.backend,
            threshold=args.threshold,
            hash_bits=args.hash_bits,
            counter_width=args.counter_width,
            morris=args.morris,
            seed=args.seed,
            mg_counters=args.mg_counters,
            mg_threshold=args.mg_threshold,
            mg_store_keys=args.mg_store_keys,
        )

    return make


def _build_store(manifest: corpus.CorpusManifest, args) -> counters.FrequencyStore:
    """Pass 1 over the corpus, sharded across workers, merged in worker order."""
    if args.morris and args.workers > 1:
        raise ValueError("probabilistic counters cannot be sharded; use --workers 1")
    make = _make_store_factory(args)
    workers = max(1, args.workers)
    started = time.perf_counter()
    if workers == 1:
        store = make()
        recorded = 0
        for entry in manifest.files:
            recorded += corpus.record_windows(
                store, corpus.read_raw_lines(entry.path), args.p_max, args.e_max
            )
    else:
        shards = [make() for _ in range(workers)]

        def run_shard(index: int) -> int:
            recorded = 0
            for entry in manifest.files[index::workers]:
                recorded += corpus.record_windows(
                    shards[index], corpus.read_raw_lines(entry.path), args.p_max, args.e_max
                )
            return recorded

        with ThreadPoolExecutor(max_workers=workers) as pool:
            recorded = sum(pool.map(run_shard, range(workers)))
        store = shards[0]
        for shard in shards[1:]:
            store.merge(shard)
    elapsed = time.perf_counter() - started
    print(
        f"pass1: recorded {recorded} window lines from {len(manifest)} files "
        f"in {elapsed:.2f}s ({args.backend})",
        file=sys.stderr,
    )
    return store


def _detect_all(manifest: corpus.CorpusManifest, oracle, cfg, workers: int):
    ids = manifest.relative_ids()

    def run_one(pair):
        index, entry = pair
        lines = corpus.read_raw_lines(entry.path)
        return detector.detect(lines, oracle.is_frequent, cfg, ids[index])

    jobs = list(enumerate(manifest.files))
    if workers <= 1:
        return [run_one(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, jobs))


# -- subcommands -----------------------------------------------------------------


def cmd_generate(args) -> int:
    spec = corpus.SyntheticSpec(
        n_files=args.files,
        preamble_variants=args.preamble_variants,
        epilogue_variants=args.epilogue_variants,
        epilogue_probability=args.epilogue_prob,
        body_line_range=(args.body_min, args.body_max),
        mutation_rate=args.mutation_rate,
        seed=args.seed,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    gold = corpus.generate_synthetic(spec, out)
    gold_path = args.gold if args.gold else out / "gold.tsv"
    corpus.write_gold(gold_path, gold)
    print(f"generated {len(gold)} files under {out} (gold: {gold_path})", file=sys.stderr)
    return 0


def cmd_index(args) -> int:
    if not (args.save_index or args.export_frequent or args.spool):
        raise ValueError("index needs --save-index, --export-frequent or --spool")
    manifest = corpus.ingest(args.corpus)
    if args.spool:
        records = corpus.write_spool(manifest, args.spool, args.p_max, args.e_max)
        print(f"spooled {records} window lines to {args.spool}", file=sys.stderr)
    if not (args.save_index or args.export_frequent):
        return 0
    store = _build_store(manifest, args)
    store.seal()
    if args.save_index:
        counters.save_index(store, args.save_index)
    if args.export_frequent:
        if isinstance(store, counters.ExactCountStore):
            counters.write_frequent_lines(args.export_frequent, store.frequent_lines())
        elif isinstance(store, counters.MisraGriesStore) and not store.store_keys:
            survivors = [
                (count, text)
                for text, count in store.monitored_counts().items()
                if count >= store.report_threshold
            ]
            counters.write_frequent_lines(args.export_frequent, survivors)
        else:
            raise ValueError(
                "--export-frequent needs a backend that keeps line texts (exact or misra-gries)"
            )
    return 0


def cmd_strip(args) -> int:
    manifest = corpus.ingest(args.corpus)
    cfg = detector.DetectorConfig(
        gap_max=args.gap_max,
        p_max=args.p_max,
        e_max=args.e_max,
        heuristics_enabled=not args.no_heuristics,
    )
    if args.load_index:
        oracle = counters.load_index(args.load_index)
    else:
        store = _build_store(manifest, args)
        store.seal()
        if args.save_index:
            counters.save_index(store, args.save_index)
        oracle = store
    reports = _detect_all(manifest, oracle, cfg, max(1, args.workers))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports_path = args.reports if args.reports else out / "reports.tsv"
    extra = ""
    if args.load_index:
        extra = f"index={Path(args.load_index).name}"
    elif args.backend in ("misra-gries", "mg") and args.workers > 1:
        extra = "gm_merge=approximate"
    detector.write_reports(reports_path, reports, header=_provenance(args, extra))
    if args.write_bodies:
        bodies_root = out / "bodies"
        for entry, report in zip(manifest.files, reports):
            lines = corpus.read_raw_lines(entry.path)
            body = detector.strip_boilerplate(lines, report)
            target = bodies_root / entry.path.relative_to(manifest.root)
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(
                ("\n".join(line.text for line in body) + "\n").encode("latin-1")
            )
    print(f"wrote {len(reports)} reports to {reports_path}", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    reports = detector.read_reports(args.reports)
    gold = corpus.read_gold(args.gold)
    result = corpus.evaluate(reports, gold)
    tolerances = [int(t) for t in str(args.tolerances).split(",") if t != ""]
    print(f"# {_provenance(args)}")
    within_cols = ",".join(f"within_{t}" for t in tolerances)
    print(f"side,files,scored,mismatches,{within_cols}")
    for side, errors, mismatches in (
        ("preamble", result.preamble_errors, result.preamble_mismatches),
        ("epilogue", result.epilogue_errors, result.epilogue_mismatches),
    ):
        fracs = ",".join(_number(result.fraction_within(side, t)) for t in tolerances)
        print(f"{side},{result.n_files},{len(errors)},{mismatches},{fracs}")
    if args.per_file:
        with open(args.per_file, "w", encoding="latin-1", newline="\n") as handle:
            handle.write("file,preamble_error,epilogue_error,category\n")
            for score in result.scores:
                pre = "" if score.preamble_error is None else str(score.preamble_error)
                epi = "" if score.epilogue_error is None else str(score.epilogue_error)
                handle.write(f"{score.file_id},{pre},{epi},{score.category}\n")
    if args.curves:
        with open(args.curves, "w", encoding="latin-1", newline="\n") as handle:
            handle.write("rank,preamble_error,epilogue_error\n")
            depth = max(len(result.preamble_errors), len(result.epilogue_errors), 0)
            for rank in range(depth):
                pre = (
                    str(result.preamble_errors[rank])
                    if rank < len(result.preamble_errors)
                    else ""
                )
                epi = (
                    str(result.epilogue_errors[rank])
                    if rank < len(result.epilogue_errors)
                    else ""
                )
                handle.write(f"{rank + 1},{pre},{epi}\n")
    return 0


def _floats(raw: str) -> list[float]:
    return [float(part) for part in str(raw).split(",") if part != ""]


def cmd_analyze(args) -> int:
    print(f"# {_provenance(args)}")
    if args.analysis == "prop1":
        header = "p,n,expected_flips"
        if args.trials:
            header += ",simulated_mean"
        print(header)
        for p in _floats(args.p):
            row = f"{_number(p)},{args.n},{_number(analysis.expected_run_time(p, args.n))}"
            if args.trials:
                row += f",{_number(analysis.simulate_run_time(p, args.n, args.trials, args.seed))}"
            print(row)
        return 0
    if args.analysis == "overshoot":
        print("p,gap_max,expected_overshoot")
        for p in _floats(args.p):
            print(f"{_number(p)},{args.gap_max},{_number(analysis.expected_overshoot(p, args.gap_max))}")
        return 0
    if args.analysis == "early-cut":
        print("sigma,window,gap_max,probability_bound")
        for sigma in _floats(args.p):
            bound = analysis.early_cut_probability(sigma, args.window, args.gap_max)
            print(f"{_number(sigma)},{args.window},{args.gap_max},{_number(bound)}")
        return 0
    if args.analysis == "fp-bounds":
        print("c,K,n,empirical_fp_rate,crude_bound,skewed_bound")
        cells_list = [int(c) for c in str(args.c).split(",")]
        thresholds = [int(k) for k in str(args.k).split(",")]
        p_heavy = _floats(args.p)[0]
        spool_counts = None
        if args.spool:
            store = counters.ExactCountStore(threshold=min(thresholds))
            with open(args.spool, "r", encoding="latin-1", newline="\n") as handle:
                for line in handle:
                    store.record(line.rstrip("\n"))
            spool_counts = store.counts
        for cells in cells_list:
            n_distinct = len(spool_counts) if spool_counts is not None else args.n
            crude = analysis.fp_bound_crude(n_distinct, cells)
            skewed = analysis.fp_bound_skewed(n_distinct, cells, p_heavy)
            for threshold in thresholds:
                empirical = ""
                if spool_counts is not None:
                    empirical = _number(_empirical_fp_rate(spool_counts, cells, threshold))
                print(
                    f"{cells},{threshold},{n_distinct},{empirical},"
                    f"{_number(crude)},{_number(skewed)}"
                )
        return 0
    if args.analysis == "histogram":
        store = counters.ExactCountStore()
        with open(args.spool, "r", encoding="latin-1", newline="\n") as handle:
            for line in handle:
                store.record(line.rstrip("\n"))
        weighting = "distinct" if args.distinct_weighted else "occurrence"
        histogram, tail = analysis.occurrence_histogram(store, weighting)
        print("occurrences,distinct_lines,tail_probability")
        for count in sorted(histogram):
            print(f"{count},{histogram[count]},{_number(tail[count])}")
        return 0
    if args.analysis == "zipf-gm":
        print("x,mean_efficiency")
        counter_budget = args.counters
        for x in _floats(args.x):
            efficiency = analysis.zipf_gm_efficiency(
                x,
                n_items=args.n_items,
                n_distinct=args.n_distinct,
                c=counter_budget,
                trials=args.trials or 30,
                seed=args.seed,
            )
            print(f"{_number(x)},{_number(efficiency)}")
        return 0
    raise ValueError(f"unknown analysis {args.analysis!r}")


def _empirical_fp_rate(counts, cells: int, threshold: int) -> float:
    """Fraction of truly infrequent distinct lines a cell array calls frequent."""
    if cells & (cells - 1):
        raise ValueError("cell count must be a power of two")
    mask = cells - 1
    totals = bytearray(cells)
    saturated = {}
    for text, count in counts.items():
        index = counters.crc64(text) & mask
        saturated[text] = index
        totals[index] = min(255, totals[index] + count)
    infrequent = 0
    false_positives = 0
    for text, count in counts.items():
        if count >= threshold:
            continue
        infrequent += 1
        if totals[saturated[text]] >= threshold:
            false_positives += 1
    return false_positives / infrequent if infrequent else 0.0


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="boilercut",
        description="Detect and strip frequent-line boilerplate from text corpora.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    generate = commands.add_parser("generate", help="write a synthetic corpus with gold boundaries")
    generate.add_argument("--out", required=True, type=Path)
    generate.add_argument("--files", type=int, default=100)
    generate.add_argument("--preamble-variants", type=int, default=5)
    generate.add_argument("--epilogue-variants", type=int, default=4)
    generate.add_argument("--epilogue-prob", type=float, default=0.85)
    generate.add_argument("--body-min", type=int, default=40)
    generate.add_argument("--body-max", type=int, default=400)
    generate.add_argument("--mutation-rate", type=float, default=0.0)
    generate.add_argument("--gold", type=Path, default=None)
    _add_common_flags(generate)

    index = commands.add_parser("index", help="pass 1 only: build and save a frequency index")
    index.add_argument("--corpus", required=True, type=Path)
    index.add_argument("--save-index", type=Path, default=None)
    index.add_argument("--export-frequent", type=Path, default=None)
    index.add_argument("--spool", type=Path, default=None)
    _add_backend_flags(index)
    _add_detector_flags(index)
    _add_common_flags(index)

    strip = commands.add_parser("strip", help="detect boundaries and optionally write bodies")
    strip.add_argument("--corpus", required=True, type=Path)
    strip.add_argument("--out", required=True, type=Path)
    strip.add_argument("--reports", type=Path, default=None)
    strip.add_argument("--write-bodies", action="store_true")
    strip.add_argument("--load-index", type=Path, default=None)
    strip.add_argument("--save-index", type=Path, default=None)
    _add_backend_flags(strip)
    _add_detector_flags(strip)
    _add_common_flags(strip)

    evaluate = commands.add_parser("evaluate", help="score reports against gold boundaries")
    evaluate.add_argument("--reports", required=True, type=Path)
    evaluate.add_argument("--gold", required=True, type=Path)
    evaluate.add_argument("--tolerances", default="0,5,10")
    evaluate.add_argument("--per-file", type=Path, default=None)
    evaluate.add_argument("--curves", type=Path, default=None)
    evaluate.add_argument("--seed", type=int, default=0)

    analyze = commands.add_parser("analyze", help="emit analysis CSVs on stdout")
    analyze.add_argument("analysis",
                         choices=["prop1", "overshoot", "early-cut", "fp-bounds", "histogram", "zipf-gm"])
    analyze.add_argument("--p", default="0.25", help="probability (comma list allowed)")
    analyze.add_argument("--n", type=int, default=10, help="run length or distinct-line count")
    analyze.add_argument("--gap-max", type=int, default=detector.DEFAULT_GAP_MAX)
    analyze.add_argument("--window", type=int, default=DEFAULT_TOP_WINDOW)
    analyze.add_argument("--c", default="8388608", help="cell count for fp-bounds (comma list allowed)")
    analyze.add_argument("--k", default="10", help="frequency threshold (comma list allowed)")
    analyze.add_argument("--x", default="3", help="Zipf exponent (comma list allowed)")
    analyze.add_argument("--counters", type=int, default=30, help="counter budget for zipf-gm")
    analyze.add_argument("--n-items", type=int, default=100_000)
    analyze.add_argument("--n-distinct", type=int, default=1000)
    analyze.add_argument("--trials", type=int, default=0)
    analyze.add_argument("--spool", type=Path, default=None)
    analyze.add_argument("--distinct-weighted", action="store_true")
    analyze.add_argument("--seed", type=int, default=0)

    subparsers = {
        "generate": generate,
        "index": index,
        "strip": strip,
        "evaluate": evaluate,
        "analyze": analyze,
    }
    return parser, subparsers


_HANDLERS = {
    "generate": cmd_generate,
    "index": cmd_index,
    "strip": cmd_strip,
    "evaluate": cmd_evaluate,
    "analyze": cmd_analyze,
}


def main(argv=None) -> int:
    parser, subparsers = build_parser()
    try:
        preliminary, _ = parser.parse_known_args(argv)
        config_path = getattr(preliminary, "config", None)
        if config_path:
            subparser = subparsers[preliminary.command]
            defaults = load_config_file(config_path)
            known = {action.dest for action in subparser._actions}
            unknown = set(defaults) - known
            if unknown:
                raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
            subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    except SystemExit as exit_error:
        return int(exit_error.code or 0)
    except ValueError as error:
        print(f"boilercut: {error}", file=sys.stderr)
        return 2
    try:
        return _HANDLERS[args.command](args)
    except ValueError as error:
        print(f"boilercut: {error}", file=sys.stderr)
        return 2
    except OSError as error:
        print(f"boilercut: {error}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
