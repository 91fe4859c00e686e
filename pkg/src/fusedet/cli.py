"""Command-line front end.

Subcommands map onto the library: ``simulate`` produces a synthetic paired
dataset, ``fuse`` runs matching plus weighted evidence fusion over paired
detection files, ``eval`` scores a detection file against ground truth,
``pr-curve`` renders labeled PR figures with CSVs alongside, and ``match`` /
``ds-combine`` expose the matcher and the evidence calculus for debugging.

Exit codes: 0 success, 2 parse/validation failure, 3 scene-pairing failure,
4 numeric failure (total evidential conflict). All randomness flows from
explicit seeds; timing lines on stderr are informational only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import evidence, matching, metrics, pipeline, plots, sim
from .formats import (
    DEFAULT_IMAGE_SIZE,
    FileFormatError,
    Scene,
    load_detections,
    load_ground_truth,
    save_detections,
    save_fused_detections,
    save_ground_truth,
    write_json_atomic,
    write_text_atomic,
)
from .geometry import SimilarityConfig
from .pipeline import FusionConfig, ScenePairingError

__all__ = ["main"]

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PAIRING = 3
EXIT_NUMERIC = 4


def _load_fusion_config(path: str | None) -> FusionConfig:
    if path is None:
        return FusionConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise FileFormatError(path, str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(path, exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(raw, dict):
        raise FileFormatError(path, "fusion config must be an object")
    try:
        similarity = SimilarityConfig(
            alpha1=float(raw.pop("alpha1", 1.0)),
            alpha2=float(raw.pop("alpha2", 1.0)),
            alpha=float(raw.pop("alpha", 1.0)),
        )
        return FusionConfig(similarity=similarity, **raw)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(path, str(exc)) from exc


def _load_scenario(path: str, seed_override: int | None) -> sim.ScenarioConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise FileFormatError(path, str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise FileFormatError(path, exc.msg, f"line {exc.lineno} column {exc.colno}") from exc
    if not isinstance(raw, dict):
        raise FileFormatError(path, "scenario config must be an object")
    try:
        sensors = {}
        for key in ("sensor_a", "sensor_b"):
            spec = dict(raw.pop(key, {}))
            for tup in ("score_tp", "score_fp"):
                if tup in spec:
                    spec[tup] = tuple(spec[tup])
            sensors[key] = sim.SensorModel(**spec)
        for tup in ("targets_per_scene", "size_range", "offset_b"):
            if tup in raw:
                raw[tup] = tuple(raw[tup])
        if seed_override is not None:
            raw["seed"] = seed_override
        return sim.ScenarioConfig(sensor_a=sensors["sensor_a"], sensor_b=sensors["sensor_b"], **raw)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(path, str(exc)) from exc


def _merge_headers(*header_maps: dict[str, Scene]) -> dict[str, Scene]:
    merged: dict[str, Scene] = {}
    for headers in header_maps:
        for image_id, scene in headers.items():
            merged.setdefault(image_id, scene)
    return merged


def _cmd_fuse(args: argparse.Namespace) -> int:
    cfg = _load_fusion_config(args.config)
    _, headers_a, scenes_a = load_detections(args.dets_a, args.pixel_coords)
    _, headers_b, scenes_b = load_detections(args.dets_b, args.pixel_coords)
    started = time.perf_counter()
    fused = pipeline.fuse_dataset(scenes_a, scenes_b, cfg, workers=args.threads)
    elapsed_ms = (time.perf_counter() - started) * 1e3
    for image_id in sorted(fused):
        counts = {"both": 0, "a_only": 0, "b_only": 0}
        for det in fused[image_id]:
            counts[det.provenance] += 1
        print(
            f"{image_id}: pairs={counts['both']} a_only={counts['a_only']} "
            f"b_only={counts['b_only']}",
            file=sys.stderr,
        )
    print(f"fusion time: {elapsed_ms:.2f} ms for {len(fused)} scene(s)", file=sys.stderr)
    save_fused_detections(args.out, fused, _merge_headers(headers_a, headers_b))
    return EXIT_OK


def _report_payload(report: metrics.EvalReport) -> dict:
    return {
        "precision": report.precision,
        "recall": report.recall,
        "ap": report.ap,
        "iou_threshold": report.iou_threshold,
        "counts": {"tp": report.tp, "fp": report.fp, "fn": report.fn},
    }


def _cmd_eval(args: argparse.Namespace) -> int:
    _, _, scenes = load_detections(args.dets, args.pixel_coords)
    _, truths = load_ground_truth(args.gts, args.pixel_coords)
    dets = [d for image_id in sorted(scenes) for d in scenes[image_id]]
    report = metrics.evaluate(dets, truths, args.iou_threshold, args.interp)
    payload = _report_payload(report)
    if args.out:
        write_json_atomic(args.out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    if args.pr_csv:
        write_text_atomic(args.pr_csv, metrics.pr_curve_csv(report))
    if args.pr_svg:
        plots.render_pr_curves([(args.label, report)], args.pr_svg)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _load_scenario(args.config, args.seed)
    truths, dets_a, dets_b = sim.generate(cfg)
    width, height = DEFAULT_IMAGE_SIZE
    headers = {
        f"scene_{s:04d}": Scene(f"scene_{s:04d}", width, height) for s in range(cfg.scenes)
    }
    os.makedirs(args.out_dir, exist_ok=True)
    by_scene_a = {image_id: [] for image_id in headers}
    by_scene_b = {image_id: [] for image_id in headers}
    for d in dets_a:
        by_scene_a[d.image_id].append(d)
    for d in dets_b:
        by_scene_b[d.image_id].append(d)
    save_ground_truth(os.path.join(args.out_dir, "ground_truth.json"), truths, headers)
    save_detections(
        os.path.join(args.out_dir, "detections_a.json"), cfg.sensor_a.name, by_scene_a, headers
    )
    save_detections(
        os.path.join(args.out_dir, "detections_b.json"), cfg.sensor_b.name, by_scene_b, headers
    )
    print(
        f"wrote {len(truths)} targets over {cfg.scenes} scenes to {args.out_dir}",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_match(args: argparse.Namespace) -> int:
    _, _, scenes_a = load_detections(args.dets_a, args.pixel_coords)
    _, _, scenes_b = load_detections(args.dets_b, args.pixel_coords)
    ids = sorted(set(scenes_a) | set(scenes_b))
    if args.image is not None:
        if args.image not in ids:
            raise FileFormatError(args.dets_a, f"image_id {args.image!r} not present")
        ids = [args.image]
    cfg = SimilarityConfig(alpha=args.alpha)
    for image_id in ids:
        a = scenes_a.get(image_id, [])
        b = scenes_b.get(image_id, [])
        scorebox = matching.score_matrix(a, b, cfg, args.metric)
        print(f"scene {image_id}: {len(a)} x {len(b)} score matrix ({args.metric})")
        for i in range(scorebox.shape[0]):
            print("  " + " ".join(f"{scorebox[i, j]:8.4f}" for j in range(scorebox.shape[1])))
        result = matching.match(a, b, cfg, args.threshold, args.strategy, args.metric)
        for i, j, score in result.pairs:
            print(f"  pair a[{i}] -- b[{j}]  score={score:.4f}")
        if result.unmatched_a:
            print(f"  unmatched a: {list(result.unmatched_a)}")
        if result.unmatched_b:
            print(f"  unmatched b: {list(result.unmatched_b)}")
    return EXIT_OK


def _parse_inline_masses(text: str) -> list[list[float]]:
    groups = [group.strip() for group in text.split(";") if group.strip()]
    if len(groups) < 2:
        raise ValueError("need at least two evidence groups separated by ';'")
    parsed = [[float(v) for v in group.split(",")] for group in groups]
    sizes = {len(row) for row in parsed}
    if len(sizes) != 1:
        raise ValueError("every evidence group must list the same number of masses")
    return parsed


def _cmd_ds_combine(args: argparse.Namespace) -> int:
    try:
        rows = _parse_inline_masses(args.masses)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    m = len(rows[0])
    labels = args.labels.split(",") if args.labels else [f"A{k + 1}" for k in range(m)]
    if len(labels) != m:
        print(f"error: {m} masses per group but {len(labels)} labels", file=sys.stderr)
        return EXIT_PARSE
    frame = evidence.Frame(labels)
    try:
        masses = []
        for row in rows:
            assignment = {frame.singleton(k): v for k, v in enumerate(row)}
            deficit = 1.0 - sum(row)
            if deficit > 1e-9:
                assignment[frame.theta] = deficit
            masses.append(evidence.MassFunction(frame, assignment))
        if args.unweighted:
            discounted = masses
            fused = evidence.dempster_combine(masses)
        else:
            discounted = evidence.weight_masses(masses).discounted
            fused = evidence.dempster_combine(discounted)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC if isinstance(exc, ArithmeticError) else EXIT_PARSE

    n = len(masses)
    header = ["Hypothesis"]
    header += [f"m_{i + 1}" for i in range(n)]
    header += [f"m'_{i + 1}" for i in range(n)]
    header.append("fused")
    widths = [max(10, len(h)) for h in header]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    rows_to_print = [(label, frame.singleton(k)) for k, label in enumerate(labels)]
    if m > 1:
        rows_to_print.append(("Theta", frame.theta))
    for label, mask in rows_to_print:
        cells = [label]
        cells += [f"{mf[mask]:.4f}" for mf in masses]
        cells += [f"{mf[mask]:.4f}" for mf in discounted]
        cells.append(f"{fused[mask]:.4f}")
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    return EXIT_OK


def _cmd_pr_curve(args: argparse.Namespace) -> int:
    _, truths = load_ground_truth(args.gts, args.pixel_coords)
    series = []
    for item in args.series:
        label, _, path = item.partition("=")
        if not path:
            raise FileFormatError(item, "series must look like LABEL=path.json")
        _, _, scenes = load_detections(path, args.pixel_coords)
        dets = [d for image_id in sorted(scenes) for d in scenes[image_id]]
        report = metrics.evaluate(dets, truths, args.iou_threshold, args.interp)
        series.append((label, report))
    plots.render_pr_curves(series, args.out)
    if args.csv_dir:
        os.makedirs(args.csv_dir, exist_ok=True)
        for label, report in series:
            write_text_atomic(
                os.path.join(args.csv_dir, f"{label}.csv"), metrics.pr_curve_csv(report)
            )
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fusedet",
        description="Decision-level fusion of two-sensor detections and its evaluation harness",
    )
    parser.add_argument("--seed", type=int, default=None, help="override scenario seed")
    parser.add_argument("--threads", type=int, default=1, help="scene-level worker count")
    sub = parser.add_subparsers(dest="command", required=True)

    fuse = sub.add_parser("fuse", help="match and fuse two paired detection files")
    fuse.add_argument("--dets-a", required=True)
    fuse.add_argument("--dets-b", required=True)
    fuse.add_argument("--out", required=True)
    fuse.add_argument("--config", default=None, help="fusion config JSON")
    fuse.add_argument("--pixel-coords", action="store_true",
                      help="ingest corner-format pixel boxes")
    fuse.set_defaults(func=_cmd_fuse)

    ev = sub.add_parser("eval", help="score detections against ground truth")
    ev.add_argument("--dets", required=True)
    ev.add_argument("--gts", required=True)
    ev.add_argument("--out", default=None, help="report JSON path (default: stdout)")
    ev.add_argument("--iou-threshold", type=float, default=0.5)
    ev.add_argument("--interp", choices=[metrics.INTERP_ALL_POINTS, metrics.INTERP_11_POINT],
                    default=metrics.INTERP_ALL_POINTS)
    ev.add_argument("--pr-csv", default=None, help="write the PR samples as CSV")
    ev.add_argument("--pr-svg", default=None, help="render the PR curve figure")
    ev.add_argument("--label", default="detections", help="series label for the figure")
    ev.add_argument("--pixel-coords", action="store_true")
    ev.set_defaults(func=_cmd_eval)

    simulate = sub.add_parser("simulate", help="generate a synthetic paired dataset")
    simulate.add_argument("--config", required=True, help="scenario JSON")
    simulate.add_argument("--out-dir", required=True)
    simulate.set_defaults(func=_cmd_simulate)

    mt = sub.add_parser("match", help="print score matrices and matched pairs")
    mt.add_argument("--dets-a", required=True)
    mt.add_argument("--dets-b", required=True)
    mt.add_argument("--image", default=None, help="restrict to one image_id")
    mt.add_argument("--metric", choices=[matching.METRIC_DDIOU, matching.METRIC_IOU,
                                         matching.METRIC_EUCLID],
                    default=matching.METRIC_DDIOU)
    mt.add_argument("--threshold", type=float, default=0.3)
    mt.add_argument("--strategy", choices=[matching.STRATEGY_OPTIMAL, matching.STRATEGY_GREEDY],
                    default=matching.STRATEGY_OPTIMAL)
    mt.add_argument("--alpha", type=float, default=1.0, help="distance-decay weight")
    mt.add_argument("--pixel-coords", action="store_true")
    mt.set_defaults(func=_cmd_match)

    ds = sub.add_parser("ds-combine", help="weight and fuse inline mass functions")
    ds.add_argument("masses", help="semicolon-separated evidences, e.g. '0.9,0.1;0.8,0.2'")
    ds.add_argument("--labels", default=None, help="comma-separated hypothesis names")
    ds.add_argument("--unweighted", action="store_true",
                    help="skip compatibility weighting (plain combination rule)")
    ds.set_defaults(func=_cmd_ds_combine)

    prc = sub.add_parser("pr-curve", help="render PR curves for one or more detection files")
    prc.add_argument("--gts", required=True)
    prc.add_argument("--series", action="append", required=True,
                     help="LABEL=detections.json (repeatable)")
    prc.add_argument("--out", required=True, help="figure path (.svg or .png)")
    prc.add_argument("--csv-dir", default=None, help="also write per-series PR CSVs here")
    prc.add_argument("--iou-threshold", type=float, default=0.5)
    prc.add_argument("--interp", choices=[metrics.INTERP_ALL_POINTS, metrics.INTERP_11_POINT],
                     default=metrics.INTERP_ALL_POINTS)
    prc.add_argument("--pixel-coords", action="store_true")
    prc.set_defaults(func=_cmd_pr_curve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ScenePairingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PAIRING
    except evidence.TotalConflictError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except sim.PlacementError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
