"""Command-line entry points: build-list, run-sim, eval, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .. import reports
from ..catalog import (
    EmptyShortlist,
    ProductQuery,
    SelectionAborted,
    filter_catalog,
    load_catalog,
    resolve_product,
)
from ..inventory import fixture_catalog_path
from ..reasoner import EndpointConfig, GeometricReasoner, RemoteReasoner
from ..simulator.experiments import (
    run_correction_experiment,
    run_detection_experiment,
    run_list_experiment,
    run_navigation_experiment,
)
from ..simulator.scenario import ConfigError, Scenario, load_scenario
from ..simulator.session import SessionEngine, SessionPhase, cue_payload, advice_payload

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shelfguide",
        description="Assistive shelf-product retrieval engine and simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_list = sub.add_parser("build-list", help="resolve shopping-list queries against a catalog")
    p_list.add_argument("--catalog", type=Path, default=None,
                        help="catalog file (newline-delimited JSON); defaults to the bundled fixture")
    mode = p_list.add_mutually_exclusive_group(required=True)
    mode.add_argument("--interactive", action="store_true", help="prompt for queries on stdin")
    mode.add_argument("--script", type=Path, help="JSONL file of {brand, name, quantity?} queries")
    p_list.add_argument("--out", type=Path, required=True, help="output list file (JSONL)")
    p_list.set_defaults(func=cmd_build_list)

    p_sim = sub.add_parser("run-sim", help="run a scripted guidance session headlessly")
    p_sim.add_argument("--config", type=Path, default=None, help="scenario config file")
    p_sim.add_argument("--list", dest="list_file", type=Path, default=None,
                       help="shopping list from build-list (JSONL); default: three bundled items")
    p_sim.add_argument("--policy", choices=("direct", "wrong-first"), default="direct",
                       help="virtual hand policy")
    p_sim.add_argument("--max-ticks", type=int, default=3000)
    p_sim.add_argument("--out", type=Path, default=None, help="write the event log (JSONL) here")
    p_sim.set_defaults(func=cmd_run_sim)

    p_eval = sub.add_parser("eval", help="run the evaluation protocols and write reports")
    p_eval.add_argument("--experiment",
                        choices=("list-creation", "detection", "navigation", "correction", "all"),
                        default="all")
    p_eval.add_argument("--config", type=Path, default=None, help="scenario config file")
    p_eval.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p_eval.add_argument("--out-dir", type=Path, default=Path("reports"))
    p_eval.add_argument("--check", action="store_true",
                        help="zero-noise closure check: fail unless every table is 100%%")
    p_eval.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p_eval.set_defaults(func=cmd_eval)

    p_serve = sub.add_parser("serve", help="run the live session service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8787)
    p_serve.add_argument("--catalog", type=Path, default=None)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def _catalog_from(path: Path | None):
    return load_catalog(path if path is not None else fixture_catalog_path())


def cmd_build_list(args) -> int:
    entries = _catalog_from(args.catalog)
    queries = _read_queries_interactive() if args.interactive else _read_queries(args.script)

    resolved = []
    failures = 0
    for query in queries:
        try:
            shortlist = filter_catalog(query, entries)
            entry = resolve_product(shortlist, _choice_provider(args.interactive))
        except (EmptyShortlist, SelectionAborted) as exc:
            print(f"  ! {query.brand} / {query.name}: {exc}", file=sys.stderr)
            failures += 1
            continue
        resolved.append(entry)
        print(f"  + {entry.brand} {entry.name} [{entry.barcode}]")

    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        for entry in resolved:
            record = {
                "barcode": entry.barcode,
                "brand": entry.brand,
                "product_name": entry.name,
                "quantity": entry.quantity,
                "image_urls": list(entry.image_refs),
            }
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    print(f"resolved {len(resolved)} item(s), {failures} failure(s) -> {args.out}")
    return EXIT_OK if not failures else EXIT_FAILURE


def _read_queries(path: Path) -> list[ProductQuery]:
    queries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            queries.append(
                ProductQuery(raw["brand"], raw["name"], raw.get("quantity"))
            )
    return queries


def _read_queries_interactive() -> list[ProductQuery]:
    print("Enter shopping-list items (blank brand to finish).")
    queries = []
    while True:
        brand = input("brand: ").strip()
        if not brand:
            break
        name = input("product name: ").strip()
        quantity = input("quantity (optional): ").strip() or None
        try:
            queries.append(ProductQuery(brand, name, quantity))
        except ValueError as exc:
            print(f"  ! {exc}")
    return queries


def _choice_provider(interactive: bool):
    if not interactive:
        return lambda candidates: 0
    def prompt(candidates):
        print("Multiple matches:")
        for i, entry in enumerate(candidates):
            print(f"  [{i}] {entry.brand} {entry.name} ({entry.quantity or 'n/a'})")
        raw = input("pick index (blank to abort): ").strip()
        if not raw:
            return None
        try:
            return int(raw)
        except ValueError:
            return None
    return prompt


_DEFAULT_SIM_LIST = [
    ("Spindrift", "Lime Sparkling Water"),
    ("Oreo", "Chocolate Sandwich Cookies"),
    ("Heinz", "Tomato Ketchup"),
]


def cmd_run_sim(args) -> int:
    scenario = load_scenario(args.config)
    engine = SessionEngine(
        catalog=_catalog_from(None),
        noise=scenario.noise,
        reasoner=_make_reasoner(scenario),
        pose=scenario.camera,
        fps=scenario.fps,
    )
    if args.list_file:
        for record in _read_list_file(args.list_file):
            engine.add_query(record["brand"], record["product_name"])
    else:
        for brand, name in _DEFAULT_SIM_LIST:
            engine.add_query(brand, name)

    if not engine.items:
        print("shopping list is empty; nothing to do", file=sys.stderr)
        return EXIT_FAILURE

    policy = _HandPolicy(args.policy)
    log = []
    for _ in range(args.max_ticks):
        engine.move_hand(policy.next_position(engine))
        emitted = engine.tick()
        log.append(_log_record(engine, emitted))
        if emitted.completed_item:
            print(f"tick {emitted.frame_idx}: retrieved {emitted.completed_item}")
        if emitted.advice is not None:
            print(f"tick {emitted.frame_idx}: correction -> {emitted.advice.phrase}")
        if engine.phase is SessionPhase.DONE:
            break

    done = engine.phase is SessionPhase.DONE
    print(f"session {'completed' if done else 'stopped'} after {engine.frame_idx} ticks; "
          f"{sum(item.done for item in engine.items)}/{len(engine.items)} items retrieved")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", encoding="utf-8") as fh:
            for record in log:
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
        print(f"event log -> {args.out}")
    return EXIT_OK if done else EXIT_FAILURE


def _read_list_file(path: Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def _log_record(engine: SessionEngine, emitted) -> dict:
    return {
        "frame_idx": emitted.frame_idx,
        "phase": emitted.phase.value,
        "cue": cue_payload(emitted.cue),
        "advice": advice_payload(emitted.advice),
        "completed_item": emitted.completed_item,
        "hand": list(engine.hand) if engine.hand else None,
    }


class _HandPolicy:
    """Scripted virtual hand: drifts toward the tracked target; the
    wrong-first variant detours to a neighboring product until corrected."""

    SPEED_PX = 40.0

    def __init__(self, kind: str):
        self.kind = kind
        self._position: tuple[float, float] | None = None
        self._detoured: set[str] = set()

    def next_position(self, engine: SessionEngine):
        if engine.phase not in (SessionPhase.NAVIGATING, SessionPhase.CORRECTING):
            self._position = None
            return None
        item = engine.current_item()
        frame = engine.last_frame
        if item is None or item.cell is None or frame is None:
            return self._position
        goal_cell = item.cell
        if self.kind == "wrong-first" and item.entry.barcode not in self._detoured:
            goal_cell = self._neighbor(engine, item.cell)
            if engine.last_advice is not None:
                self._detoured.add(item.entry.barcode)
                goal_cell = item.cell
        try:
            truth = next(t for t in frame.visible_truths() if t.cell == goal_cell)
        except StopIteration:
            return self._position
        goal = truth.center
        if self._position is None:
            self._position = (engine.shelf.slots_per_tier * 2.0, frame.size[1] - 10.0)
        x, y = self._position
        dx, dy = goal[0] - x, goal[1] - y
        dist = (dx * dx + dy * dy) ** 0.5
        if dist <= self.SPEED_PX:
            self._position = goal
        else:
            self._position = (x + dx / dist * self.SPEED_PX, y + dy / dist * self.SPEED_PX)
        return self._position

    def _neighbor(self, engine: SessionEngine, cell):
        tier, slot = cell
        candidates = [
            (tier, slot + 1), (tier, slot - 1), (tier + 1, slot), (tier - 1, slot),
        ]
        for cand in candidates:
            if cand in engine.shelf.products:
                return cand
        return cell


def _make_reasoner(scenario: Scenario):
    if scenario.reasoner == "remote":
        endpoint = EndpointConfig.from_env()
        if endpoint is None:
            raise ConfigError(
                "reasoner 'remote' needs SHELF_REASONER_URL (and optionally "
                "SHELF_REASONER_KEY / SHELF_REASONER_MODEL)"
            )
        return RemoteReasoner(endpoint)
    return GeometricReasoner()


def cmd_eval(args) -> int:
    scenario = load_scenario(args.config)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    if args.check:
        scenario = scenario.zero_noise()
    reasoner = _make_reasoner(scenario)
    reasoner_name = scenario.reasoner
    out_dir: Path = args.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    wanted = (
        ("list-creation", "detection", "navigation", "correction")
        if args.experiment == "all"
        else (args.experiment,)
    )
    detection = navigation = correction = list_creation = None

    if "list-creation" in wanted:
        list_creation = run_list_experiment(
            seed=scenario.seed, with_typos=not args.check
        )
        reports.write_csv(
            reports.list_creation_table(list_creation), out_dir / "list_creation.csv"
        )
        if not args.no_figures:
            reports.list_creation_figure(list_creation, out_dir / "list_creation.png")
    if "detection" in wanted:
        detection = run_detection_experiment(noise=scenario.noise, sweep=scenario.sweep)
        reports.write_csv(reports.detection_table(detection), out_dir / "detection.csv")
        if not args.no_figures:
            reports.detection_figure(detection, out_dir / "detection.png")
    if "navigation" in wanted:
        navigation = [run_navigation_experiment(reasoner=reasoner, reasoner_name=reasoner_name)]
        reports.write_csv(reports.navigation_table(navigation), out_dir / "navigation.csv")
        if not args.no_figures:
            reports.navigation_figure(navigation, out_dir / "navigation.png")
    if "correction" in wanted:
        correction = [run_correction_experiment(reasoner=reasoner, reasoner_name=reasoner_name)]
        reports.write_csv(reports.correction_table(correction), out_dir / "correction.csv")
        if not args.no_figures:
            reports.correction_figure(correction, out_dir / "correction.png")

    lines = reports.summary_lines(detection, navigation, correction, list_creation)
    (out_dir / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for line in lines:
        print(line)

    if args.check:
        failures = _closure_failures(detection, navigation, correction, list_creation)
        if failures:
            for failure in failures:
                print(f"CHECK FAILED: {failure}", file=sys.stderr)
            return EXIT_FAILURE
        print("CHECK OK: all zero-noise tables at 100%")
    return EXIT_OK


def _closure_failures(detection, navigation, correction, list_creation=None) -> list[str]:
    failures = []
    for row in list_creation or ():
        if row.correct != row.total:
            failures.append(f"list creation {row.category}: {row.correct}/{row.total}")
    for row in detection or ():
        if row.successes != row.trials:
            failures.append(
                f"detection {row.radius_m} m @ {row.azimuth_deg}°: "
                f"{row.successes}/{row.trials}"
            )
    for res in navigation or ():
        for distance, (correct, trials) in res.per_distance.items():
            if correct != trials:
                failures.append(f"navigation {distance} m: {correct}/{trials}")
    for res in correction or ():
        for (config, phase), (correct, trials) in res.cells.items():
            if correct != trials:
                failures.append(f"correction {config} phase {phase}: {correct}/{trials}")
    return failures


def cmd_serve(args) -> int:
    from .service import serve

    catalog = _catalog_from(args.catalog) if args.catalog else None
    serve(host=args.host, port=args.port, catalog=catalog)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
