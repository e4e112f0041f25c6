"""Command-line entry points: file tracking, ablation grids, synthetic runs.

Exit codes: 0 success, 1 input error (bad files, flag conflicts, unknown
scenario), 2 contract violation while running.  Summaries go to stderr so
``--out -`` can stream the track file on stdout.
"""

import argparse
import sys

from . import io as mio
from . import synth
from .appearance import AppearanceParams
from .association import AssociationParams
from .kernels import BACKEND
from .tracker import Tracker, TrackerConfig

PRESETS = {
    # crowded-pedestrian defaults / dance-floor defaults
    "mot": {"aw": 0.75, "eps": 0.5},
    "dancetrack": {"aw": 1.25, "eps": 1.0},
}

DEFAULTS = {
    "sigma": 0.4,
    "alpha_f": 0.95,
    "aw": 0.75,
    "eps": 0.5,
    "lambda_ocm": 0.2,
    "delta_t": 3,
    "min_hits": 3,
    "max_age": 30,
    "iou_floor": 0.3,
}


class _Parser(argparse.ArgumentParser):
    """argparse with input-error exit code 1 instead of the default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_tracker_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("tracker configuration")
    g.add_argument("--sigma", type=float, default=None, help="detection confidence gate (default 0.4)")
    g.add_argument("--alpha-f", type=float, default=None, help="appearance EMA floor (default 0.95)")
    g.add_argument("--aw", type=float, default=None, help="global appearance weight (default 0.75; preset-dependent)")
    g.add_argument("--eps", type=float, default=None, help="cap on the adaptive appearance boost (default 0.5; preset-dependent)")
    g.add_argument("--lambda-ocm", type=float, default=None, help="direction-consistency penalty weight (default 0.2)")
    g.add_argument("--delta-t", type=int, default=None, help="direction estimate horizon in observations (default 3)")
    g.add_argument("--min-hits", type=int, default=None, help="updates before a track is confirmed (default 3)")
    g.add_argument("--max-age", type=int, default=None, help="frames a track may coast before retirement (default 30)")
    g.add_argument("--iou-floor", type=float, default=None, help="minimum IoU for a surviving match (default 0.3)")
    g.add_argument("--preset", choices=sorted(PRESETS), default=None, help="named weight set; explicit flags override it")
    g.add_argument("--no-cmc", action="store_true", help="ignore camera transforms")
    g.add_argument("--appearance", dest="appearance", action="store_true", default=None, help="force appearance matching on (requires --emb)")
    g.add_argument("--no-appearance", dest="appearance", action="store_false", help="force appearance matching off")
    g.add_argument("--no-da", action="store_true", help="fixed EMA factor instead of the confidence-gated one")
    g.add_argument("--no-aw", action="store_true", help="disable the adaptive appearance boost")
    g.add_argument("--report-detections", action="store_true", help="emit raw detection boxes instead of filter posteriors")


def _resolve(args, key):
    explicit = getattr(args, key)
    if explicit is not None:
        return explicit
    preset = PRESETS.get(args.preset or "", {})
    if key in preset:
        return preset[key]
    return DEFAULTS[key]


def build_config(args, appearance_enabled: bool) -> TrackerConfig:
    return TrackerConfig(
        sigma=_resolve(args, "sigma"),
        min_hits=_resolve(args, "min_hits"),
        max_age=_resolve(args, "max_age"),
        assoc=AssociationParams(
            a_w=_resolve(args, "aw"),
            epsilon=_resolve(args, "eps"),
            lambda_ocm=_resolve(args, "lambda_ocm"),
            iou_floor=_resolve(args, "iou_floor"),
            delta_t=_resolve(args, "delta_t"),
        ),
        appear=AppearanceParams(
            alpha_f=_resolve(args, "alpha_f"),
            sigma=_resolve(args, "sigma"),
        ),
        cmc_enabled=not args.no_cmc,
        appearance_enabled=appearance_enabled,
        aw_enabled=not args.no_aw,
        da_enabled=not args.no_da,
        report_detections=getattr(args, "report_detections", False),
    )


def _summary(label: str, tracker: Tracker) -> None:
    s = tracker.stats
    mean_alpha = "-" if s.mean_alpha is None else f"{s.mean_alpha:.4f}"
    print(
        f"[{label}] frames={s.frames} detections={s.detections} "
        f"tracks_created={s.tracks_created} matches={s.matches} "
        f"ocr_recoveries={s.ocr_recoveries} mean_alpha={mean_alpha} "
        f"kernels={BACKEND}",
        file=sys.stderr,
    )


def _load_inputs(args):
    dets = mio.parse_detections(args.det)
    embs = None
    if args.emb:
        counts = {f: len(rows) for f, rows in dets.items()}
        embs = mio.parse_embeddings(args.emb, expected_count_per_frame=counts)
    cmc = mio.parse_cmc(args.cmc) if args.cmc else None
    return dets, embs, cmc


def _input_error(msg: str) -> int:
    print(f"motrack: error: {msg}", file=sys.stderr)
    return 1


def cmd_track(args) -> int:
    # tri-state --appearance/--no-appearance; the default follows --emb so a
    # bare --det/--out run is motion-only rather than an error
    if args.appearance is True and not args.emb:
        return _input_error("--appearance requires --emb (no embedding file given)")
    dets, embs, cmc = _load_inputs(args)
    appearance = bool(args.emb) if args.appearance is None else args.appearance
    if not appearance:
        embs = None
    tracker = Tracker(build_config(args, appearance))
    outputs = tracker.run_sequence(dets, embs, cmc)
    if args.out == "-":
        mio.write_tracks(outputs, sys.stdout)
    else:
        mio.write_tracks(outputs, args.out)
    _summary("track", tracker)
    return 0


ABLATION_GRID = [
    # (appearance, dynamic-alpha, camera-correction, adaptive-weighting)
    (False, False, False, False),
    (False, False, True, False),
    (True, False, False, False),
    (True, True, False, False),
    (True, True, True, False),
    (True, True, True, True),
]


def cmd_ablate(args) -> int:
    if not args.emb:
        return _input_error("ablate needs --emb: the appearance rows are meaningless without embeddings")
    dets, embs, cmc = _load_inputs(args)
    gt_rows = mio.parse_tracks(args.gt)
    gt = {}
    for frame, entries in gt_rows.items():
        for gt_id, box, _score in entries:
            gt.setdefault(gt_id, {})[frame] = box

    print("appr  da  cmc  aw   ids  mota_lite  idf1_lite")
    for appr, da, use_cmc, aw in ABLATION_GRID:
        cfg = build_config(args, appearance_enabled=appr)
        cfg.da_enabled = da
        cfg.cmc_enabled = use_cmc and not args.no_cmc
        cfg.aw_enabled = aw
        tracker = Tracker(cfg)
        outputs = tracker.run_sequence(dets, embs if appr else None, cmc)
        m = synth.score(gt, outputs)
        flags = ["x" if v else "." for v in (appr, da, use_cmc, aw)]
        print(
            f"{flags[0]:>4}  {flags[1]:>2}  {flags[2]:>3}  {flags[3]:>2}  "
            f"{m.id_switches:>4}  {m.mota_lite:>9.4f}  {m.idf1_lite:>9.4f}"
        )
        if args.out_dir:
            from pathlib import Path

            name = f"appr{int(appr)}_da{int(da)}_cmc{int(use_cmc)}_aw{int(aw)}.txt"
            mio.write_tracks(outputs, Path(args.out_dir) / name)
    return 0


SCENARIO_DEFAULTS = {
    # pan only shows the camera-correction contrast when single-frame tracks
    # are reported, so it defaults to immediate confirmation
    "pan": {"min_hits": 1},
}


def cmd_synth(args) -> int:
    if args.scenario not in synth.GENERATORS:
        return _input_error(
            f"unknown scenario {args.scenario!r}; available: "
            + ", ".join(sorted(synth.GENERATORS))
        )
    for key, value in SCENARIO_DEFAULTS.get(args.scenario, {}).items():
        if getattr(args, key) is None:
            setattr(args, key, value)

    sigma = _resolve(args, "sigma")
    if args.scenario == "crossing":
        scenario = synth.gen_crossing(args.seed, n_targets=args.targets, noise=args.noise, sigma=sigma)
    elif args.scenario == "pan":
        scenario = synth.gen_pan(args.seed, amplitude=args.amplitude)
    else:
        scenario = synth.gen_occlusion(args.seed, gap=args.gap)

    if args.out_dir:
        paths = scenario.write_files(args.out_dir)
        dets = mio.parse_detections(paths["det"])
        embs = (
            mio.parse_embeddings(paths["emb"], expected_count_per_frame=scenario.det_counts())
            if "emb" in paths
            else None
        )
        cmc = mio.parse_cmc(paths["cmc"]) if "cmc" in paths else None
    else:
        dets, embs, cmc = scenario.detections(), scenario.embs, scenario.cmc

    appearance = embs is not None if args.appearance is None else args.appearance
    if args.appearance is True and embs is None:
        return _input_error(f"--appearance requested but scenario {args.scenario!r} emits no embeddings")
    tracker = Tracker(build_config(args, appearance))
    outputs = tracker.run_sequence(dets, embs if appearance else None, cmc if not args.no_cmc else None)
    if args.out_dir:
        from pathlib import Path

        mio.write_tracks(outputs, Path(args.out_dir) / "tracks.txt")
    m = synth.score(scenario.gt, outputs)
    print(
        f"scenario={args.scenario} seed={args.seed} id_switches={m.id_switches} "
        f"mota_lite={m.mota_lite:.4f} idf1_lite={m.idf1_lite:.4f}"
    )
    _summary(f"synth:{args.scenario}", tracker)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="motrack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="track a detection file and write a track file")
    p_track.add_argument("--det", required=True, help="detection file path")
    p_track.add_argument("--emb", default=None, help="embedding file path (text or packed)")
    p_track.add_argument("--cmc", default=None, help="camera transform file path")
    p_track.add_argument("--out", required=True, help="output track file path, or - for stdout")
    _add_tracker_flags(p_track)
    p_track.set_defaults(func=cmd_track)

    p_ablate = sub.add_parser("ablate", help="run the feature-switch grid and score each row")
    p_ablate.add_argument("--det", required=True)
    p_ablate.add_argument("--emb", default=None)
    p_ablate.add_argument("--cmc", default=None)
    p_ablate.add_argument("--gt", required=True, help="ground-truth track file for scoring")
    p_ablate.add_argument("--out-dir", default=None, help="also write one track file per row")
    _add_tracker_flags(p_ablate)
    p_ablate.set_defaults(func=cmd_ablate)

    p_synth = sub.add_parser("synth", help="generate a synthetic scenario, track it, score it")
    p_synth.add_argument("scenario", help="crossing | pan | occlusion")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out-dir", default=None, help="write scenario files and tracks here")
    p_synth.add_argument("--targets", type=int, default=2, help="crossing: number of targets")
    p_synth.add_argument("--noise", type=float, default=0.1, help="crossing: embedding noise level")
    p_synth.add_argument("--amplitude", type=float, default=60.0, help="pan: camera motion px/frame")
    p_synth.add_argument("--gap", type=int, default=3, help="occlusion: frames without detections")
    _add_tracker_flags(p_synth)
    p_synth.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (mio.ParseError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"motrack: input error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"motrack: contract violation: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
