"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 consistency or
inference failure. Output files are written only when a command succeeds.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from . import evalkit, fahp, ingest
from .it2core import POLLUTANTS, TERMS, default_table, load_parameter_table, term_name
from .inference import WEIGHT_POLICIES, Engine, ZeroFiringError
from .kgraph import fixture_text
from .kgraph.mapping import assessment_triples, weather_triples
from .kgraph.query import dl_membership, execute_query, parse_dl_query, parse_query
from .kgraph.rules import materialize, parse_rules as parse_horn_rules
from .kgraph.schema import default_schema, load_schema, ontology_counts
from .kgraph.store import TripleStore, load_store
from .rulebase import generate_rules, parse_rules

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_FAILURE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


# --- helpers -----------------------------------------------------------------


def _read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _table(args):
    return load_parameter_table(_read(args.table)) if getattr(args, "table", None) else default_table()


def _weights(args) -> dict[str, float]:
    if getattr(args, "weights", None):
        doc = json.loads(_read(args.weights))
        doc = doc.get("weights", doc)
        return fahp.pollutant_weights(fahp.WeightVector.from_mapping(doc))
    m = fahp.parse_matrix(_read(args.matrix)) if getattr(args, "matrix", None) else fahp.default_matrix()
    return fahp.pollutant_weights(fahp.compute_weights(m, args.cr_threshold))


def _ranges(records) -> dict[str, tuple[float, float]]:
    return {p: (min(r.values[p] for r in records), max(r.values[p] for r in records)) for p in POLLUTANTS}


def _num(v: float) -> str:
    return f"{v:.4f}"


def _assessment_csv(records, results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["StationId", "Date", "aqi_l", "aqi_r", "aqi", "category", "AQI_Bucket"])
    for r, a in zip(records, results):
        w.writerow([r.station, r.date, _num(a.interval.aqi_l), _num(a.interval.aqi_r), _num(a.aqi), a.category, r.bucket])
    return buf.getvalue()


def _store_from(paths) -> TripleStore:
    store = TripleStore()
    for p in paths:
        for t in load_store(_read(p)):
            store.add(t)
    return store


def _weights_text(result: fahp.FAHPResult) -> str:
    w = result.weights
    lines = [f"{'pollutant':<10}{'weight':>8}  rank"]
    rank = {name: i + 1 for i, name in enumerate(w.ranking())}
    for name in w.names:
        lines.append(f"{name:<10}{w[name]:>8.4f}  {rank[name]}")
    c = result.consistency
    lines += ["", f"lambda_max: {c.lambda_max:.4f}", f"CI:         {c.ci:.4f}", f"CR:         {c.cr:.4f}"]
    return "\n".join(lines) + "\n"


def _weights_json(result: fahp.FAHPResult) -> str:
    c = result.consistency
    doc = {
        "weights": {k: round(v, 10) for k, v in result.weights.as_dict().items()},
        "lambda_max": round(c.lambda_max, 10),
        "ci": round(c.ci, 10),
        "cr": round(c.cr, 10),
    }
    return json.dumps(doc, indent=2) + "\n"


# --- commands: each returns (stdout text, {path: file text}) ------------------


def cmd_preprocess(args):
    raw, report = ingest.load_csv(args.data)
    for rowno, msg in report.row_errors:
        print(f"warning: row {rowno}: {msg}", file=sys.stderr)
    clean, stats = ingest.preprocess(raw, args.impute_scope)
    for msg in ingest.validate_units(clean, _table(args)):
        print(f"warning: {msg}", file=sys.stderr)
    files = {args.out: ingest.clean_csv_text(clean)}
    if args.stats:
        files[args.stats] = stats.to_json()
    return stats.to_text(), files


def cmd_weights(args):
    m = fahp.parse_matrix(_read(args.matrix)) if args.matrix else fahp.default_matrix()
    for row, col, found, mirror in m.lower_mismatches:
        print(f"note: ({row}, {col}) reads {found}, not the reciprocal of {mirror}; the reciprocal is used",
              file=sys.stderr)
    result = fahp.analyse(m, args.cr_threshold)
    files = {args.out: _weights_json(result)} if args.out else {}
    return _weights_text(result), files


def cmd_export_table(args):
    text = _table(args).to_toml()
    return ("" if args.out else text), ({args.out: text} if args.out else {})


def _assess_records(args, records):
    table = _table(args)
    weights = _weights(args)
    if args.rules:
        rb = parse_rules(_read(args.rules))
    else:
        rb = generate_rules(_ranges(records), table, saturate=True)
    engine = Engine(rb, weights, table, policy=args.weight_policy)
    return [engine.assess(r.values) for r in records], rb


def cmd_assess(args):
    records = ingest.load_clean(args.data)
    if not records:
        raise ingest.DataError(f"{args.data}: no rows")
    results, rb = _assess_records(args, records)
    files = {args.out: _assessment_csv(records, results)}
    if args.emit_triples:
        files[args.emit_triples] = TripleStore(assessment_triples(records, results)).to_text()
    counts = {t: 0 for t in TERMS}
    for a in results:
        counts[a.category] += 1
    summary = [f"assessed {len(records)} rows with {len(rb)} rules ({rb.provenance})"]
    summary += [f"  {t:<13}{n}" for t, n in counts.items()]
    return "\n".join(summary) + "\n", files


def cmd_reason(args):
    store = _store_from(args.triples)
    rules = parse_horn_rules(_read(args.rules)) if args.rules else parse_horn_rules(fixture_text("swrl_rules.txt"))
    m = materialize(store, rules, args.max_rounds)
    text = m.store.to_text(mark_inferred=not args.no_marks)
    msg = f"{len(store)} asserted, {len(m.inferred)} inferred, fixpoint after {m.rounds} rounds\n"
    return (msg if args.out else text), ({args.out: text} if args.out else {})


def cmd_query(args):
    store = _store_from(args.triples)
    if args.rules:
        store = materialize(store, parse_horn_rules(_read(args.rules))).store
    text = _read(args.query)
    if args.dl:
        found = dl_membership(store, parse_dl_query(text))
        out = "".join(t.value.rsplit("#", 1)[-1] + "\n" for t in found)
    else:
        out = execute_query(store, parse_query(text)).to_text()
    return (out if not args.out else ""), ({args.out: out} if args.out else {})


def cmd_counts(args):
    schema = load_schema(args.schema) if args.schema else default_schema()
    store = _store_from(args.triples) if args.triples else None
    counts = ontology_counts(schema, store)
    if args.json:
        text = json.dumps(counts.as_dict(), indent=2) + "\n"
    else:
        text = "".join(f"{k.replace('_', ' ')}: {v}\n" for k, v in counts.as_dict().items())
    return text, {}


def _labels(path, column: str) -> list[str]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise ingest.DataError(f"{path}: no {column!r} column")
        out = []
        for row in reader:
            value = row[column].strip()
            if not value:
                raise ingest.DataError(f"{path}: empty {column} at line {reader.line_num}")
            try:
                out.append(term_name(value))
            except KeyError:
                raise ingest.DataError(f"{path}: line {reader.line_num}: unknown category {value!r}") from None
        return out


def cmd_eval(args):
    predicted = _labels(args.pred, args.pred_column)
    actual = _labels(args.actual or args.pred, args.actual_column)
    if len(actual) != len(predicted):
        raise ingest.DataError(f"{len(actual)} actual labels vs {len(predicted)} predictions")
    healthy = evalkit.healthy_boundary(args.healthy_until)
    if args.sample:
        s = evalkit.sampled_evaluation(actual, predicted, args.sample, args.repeats, args.seed, healthy)
        doc = s.to_dict()
        text = "".join(f"{k}: {v}\n" for k, v in doc.items())
        body = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        report = evalkit.evaluate(actual, predicted, healthy)
        text, body = report.to_text(), report.to_json()
    return text, ({args.json: body} if args.json else {})


def cmd_eval_scores(args):
    if args.counts:
        doc = json.loads(_read(args.counts))
        classes = doc["classes"]
        subclass = doc.get("subclass_axioms", args.subclass)
        relations = doc.get("object_properties", args.relations)
        properties = doc.get("data_properties", args.properties)
        individuals = doc.get("individuals", args.individuals)
    else:
        classes, subclass, relations = args.classes, args.subclass, args.relations
        properties, individuals = args.properties, args.individuals
    if None in (classes, subclass, relations, properties, individuals):
        raise UsageError("need --counts or all of --classes --subclass --relations --properties --individuals")
    om, kb = evalkit.ontology_scores(classes, subclass, relations, properties, individuals)
    return f"score_om: {om:.2f}\nscore_kb: {kb:.2f}\n", {}


def cmd_demo(args):
    out = Path(args.out)
    files: dict[str, str] = {}
    log = []

    raw, _ = ingest.load_csv(ingest.sample_path())
    clean, stats = ingest.preprocess(raw, args.impute_scope)
    files[str(out / "clean.csv")] = ingest.clean_csv_text(clean)
    files[str(out / "stats.json")] = stats.to_json()
    log.append(f"preprocess: {stats.rows_in} rows, {stats.rows_dropped} dropped, {stats.rows_kept} kept")

    result = fahp.analyse(fahp.default_matrix(), args.cr_threshold)
    files[str(out / "weights.json")] = _weights_json(result)
    log.append(f"weights: CR = {result.consistency.cr:.4f}, ranking {' > '.join(result.weights.ranking())}")

    table = default_table()
    rb = generate_rules(_ranges(clean), table, saturate=True)
    engine = Engine(rb, fahp.pollutant_weights(result.weights), table, policy=args.weight_policy)
    results = [engine.assess(r.values) for r in clean]
    files[str(out / "rules.txt")] = rb.to_dsl()
    files[str(out / "assessments.csv")] = _assessment_csv(clean, results)
    log.append(f"assess: {len(rb)} rules, {len(results)} observations")

    triples = assessment_triples(clean, results)
    triples += weather_triples(1, "Wind", 1.5)
    store = TripleStore(triples)
    files[str(out / "triples.nt")] = store.to_text()
    m = materialize(store, parse_horn_rules(fixture_text("swrl_rules.txt")))
    files[str(out / "inferred.nt")] = m.store.to_text()
    log.append(f"reason: {len(store)} asserted, {len(m.inferred)} inferred")

    severe = dl_membership(m.store, "Observation and hasPM10Category value PM10_Severe "
                                    "and hasImpact value PrematureMortalityRisk")
    log.append("severe chain: " + (", ".join(t.local for t in severe) or "none"))

    for name in ("query1", "query2"):
        table_out = execute_query(m.store, parse_query(fixture_text(f"{name}.rq")))
        files[str(out / f"{name}.tsv")] = table_out.to_text()
        log.append(f"{name}: {len(table_out)} rows")
        log.append(table_out.to_text().rstrip("\n"))

    report = evalkit.evaluate([r.bucket for r in clean], [a.category for a in results],
                              evalkit.healthy_boundary(args.healthy_until))
    files[str(out / "metrics.json")] = report.to_json()
    files[str(out / "metrics.txt")] = report.to_text()
    log.append(report.to_text().rstrip("\n"))
    return "\n".join(log) + "\n", files


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="it2aqi", description="Interval Type-2 fuzzy AQI assessment and knowledge-graph reasoning.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    def common_fuzzy(sp):
        sp.add_argument("--table", help="membership parameter table (TOML); default: bundled")
        sp.add_argument("--cr-threshold", type=float, default=fahp.DEFAULT_CR_THRESHOLD)

    sp = sub.add_parser("preprocess", help="drop unlabelled rows and impute medians")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--stats", help="write dataset statistics as JSON")
    sp.add_argument("--impute-scope", choices=("global", "station"), default="global")
    sp.add_argument("--table", help="membership table used for unit checks")
    sp.set_defaults(func=cmd_preprocess)

    sp = sub.add_parser("weights", help="pollutant weights from a pairwise comparison matrix")
    sp.add_argument("--matrix", help="matrix file; default: bundled")
    sp.add_argument("--cr-threshold", type=float, default=fahp.DEFAULT_CR_THRESHOLD)
    sp.add_argument("--out", help="write weights as JSON")
    sp.set_defaults(func=cmd_weights)

    sp = sub.add_parser("export-table", help="print the membership parameter table")
    sp.add_argument("--table")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export_table)

    sp = sub.add_parser("assess", help="assess cleaned observations")
    sp.add_argument("--data", required=True, help="cleaned CSV from preprocess")
    sp.add_argument("--out", required=True)
    common_fuzzy(sp)
    sp.add_argument("--weights", help="JSON weights (as written by 'weights --out')")
    sp.add_argument("--matrix", help="pairwise matrix to derive weights from")
    sp.add_argument("--rules", help="rule file; default: generated from the data ranges")
    sp.add_argument("--weight-policy", choices=WEIGHT_POLICIES, default="driver")
    sp.add_argument("--emit-triples", metavar="PATH", help="also write observation triples")
    sp.set_defaults(func=cmd_assess)

    sp = sub.add_parser("reason", help="apply Horn rules to a triple file")
    sp.add_argument("--triples", required=True, nargs="+")
    sp.add_argument("--rules", help="rule file; default: bundled")
    sp.add_argument("--out")
    sp.add_argument("--max-rounds", type=int, default=100)
    sp.add_argument("--no-marks", action="store_true", help="omit '# inferred by' comments")
    sp.set_defaults(func=cmd_reason)

    sp = sub.add_parser("query", help="run a SELECT or membership query")
    sp.add_argument("--triples", required=True, nargs="+")
    sp.add_argument("--query", required=True)
    sp.add_argument("--rules", help="materialize these rules first")
    sp.add_argument("--dl", action="store_true", help="query is a class-membership expression")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("counts", help="ontology entity and axiom counts")
    sp.add_argument("--schema", help="schema YAML; default: bundled")
    sp.add_argument("--triples", nargs="*")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_counts)

    sp = sub.add_parser("eval", help="metrics report ('eval scores' for ontology scores)")
    sp.add_argument("--pred", required=True, help="CSV with predicted categories")
    sp.add_argument("--actual", help="CSV with actual categories; default: the --pred file")
    sp.add_argument("--pred-column", default="category")
    sp.add_argument("--actual-column", default="AQI_Bucket")
    sp.add_argument("--healthy-until", default="Satisfactory", choices=TERMS,
                    help="most severe category still counted as healthy")
    sp.add_argument("--sample", type=int, help="evaluate random subsets of this size")
    sp.add_argument("--repeats", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--json", metavar="PATH")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("demo", help="run the whole pipeline on the bundled sample")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--impute-scope", choices=("global", "station"), default="global")
    sp.add_argument("--cr-threshold", type=float, default=fahp.DEFAULT_CR_THRESHOLD)
    sp.add_argument("--weight-policy", choices=WEIGHT_POLICIES, default="driver")
    sp.add_argument("--healthy-until", default="Satisfactory", choices=TERMS)
    sp.set_defaults(func=cmd_demo)
    return p


def build_scores_parser() -> argparse.ArgumentParser:
    sp = _Parser(prog="it2aqi eval scores", description="Ontology model and knowledge-base scores.")
    sp.add_argument("--counts", help="JSON counts (as printed by 'counts --json')")
    for name in ("classes", "subclass", "relations", "properties", "individuals"):
        sp.add_argument(f"--{name}", type=int)
    sp.set_defaults(func=cmd_eval_scores)
    return sp


def _write_all(files: dict[str, str]) -> None:
    """Write every file or none: stage to temporaries, then rename."""
    staged = []
    try:
        for path, text in files.items():
            d = os.path.dirname(os.path.abspath(path))
            os.makedirs(d, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=d, prefix=".it2aqi-")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, path))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        if argv[:2] == ["eval", "scores"]:
            args = build_scores_parser().parse_args(argv[2:])
            args.command = "eval scores"
        else:
            args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        text, files = args.func(args)
        _write_all(files)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (fahp.ConsistencyError, ZeroFiringError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        # DataError, ParseError, RuleSyntaxError, ParameterError and friends are ValueErrors.
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_DATA
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
