"""``neptune`` command line: synth, train, detect, baseline, dump-merge, dump-segments."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import shutil
import sys
from pathlib import Path

import numpy as np

from .detection import FORMULAS, detect_stream, eval_baseline, pearson
from .features import label_positive, read_labels, window_truth
from .frames import FrameError, FrameWindow, load_frame_sequence, partition_windows, stack
from .model import DetectorModel, ModelMismatch
from .pipeline import MODEL_KEYS, RunConfig, TrainingError, analyze_window, crop_stack, train
from .segmentation import dump_segment_csv, dump_segment_map
from .spectral import dump_csv, dump_pgm
from .svg import timeline_svg
from .synth import SceneSpec, write_scene

log = logging.getLogger("neptune")


class CliError(Exception):
    pass


class Outputs:
    """Tracks paths a command creates so a failed run can remove them."""

    def __init__(self):
        self._new: list[Path] = []

    def claim(self, path) -> Path:
        path = Path(path)
        if not path.exists():
            self._new.append(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def dir(self, path) -> Path:
        path = Path(path)
        if not path.exists():
            # claim the topmost missing ancestor so cleanup removes everything we made
            top = path
            while not top.parent.exists():
                top = top.parent
            self._new.append(top)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def rollback(self) -> None:
        for p in reversed(self._new):
            if p.is_dir():
                shutil.rmtree(p, ignore_errors=True)
            elif p.exists():
                p.unlink()


# -- config -------------------------------------------------------------------

CONFIG_FLAGS = {
    "fps": dict(type=int),
    "crop": dict(type=int, nargs=4, metavar=("X0", "Y0", "W", "H")),
    "dc_policy": dict(choices=["exclude_dc", "include_dc"]),
    "adjacency": dict(choices=["four", "eight"]),
    "std_convention": dict(choices=["population", "sample"]),
    "percentile_source": dict(choices=["computed", "builtin", "builtin_repaired"]),
    "kmeans_init": dict(choices=["optimal", "quantile"]),
    "stride_s": dict(type=int),
    "window_lengths": dict(type=int, nargs="+"),
    "frame_format": dict(choices=["pgm_dir", "png_dir", "raw_y8"]),
    "width": dict(type=int),
    "height": dict(type=int),
    "threads": dict(type=int),
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of run settings; flags override it")
    for name, kw in CONFIG_FLAGS.items():
        p.add_argument("--" + name.replace("_", "-"), dest=name, default=None, **kw)


def _user_settings(args) -> dict:
    """Settings the user asked for explicitly (config file, then flags)."""
    d = {}
    if args.config:
        try:
            with open(args.config) as fh:
                d = json.load(fh)
        except json.JSONDecodeError as e:
            raise CliError(f"{args.config}: malformed JSON ({e})") from e
        if not isinstance(d, dict):
            raise CliError(f"{args.config}: expected a JSON object")
    for name in CONFIG_FLAGS:
        v = getattr(args, name, None)
        if v is not None:
            d[name] = v
    return d


def _config(args, base: dict | None = None) -> tuple[RunConfig, dict]:
    user = _user_settings(args)
    merged = dict(base or {})
    merged.update(user)
    try:
        return RunConfig.from_dict(merged), user
    except (TypeError, ValueError) as e:
        raise CliError(f"bad configuration: {e}") from e


def _frames(path, config: RunConfig) -> np.ndarray:
    frames = stack(load_frame_sequence(path, config.frame_format, width=config.width,
                                       height=config.height))
    return crop_stack(frames, config.crop)


# -- commands -----------------------------------------------------------------

def cmd_synth(args, out: Outputs) -> int:
    try:
        spec = SceneSpec.load(args.spec)
    except json.JSONDecodeError as e:
        raise CliError(f"{args.spec}: malformed JSON ({e})") from e
    except (KeyError, TypeError) as e:
        raise CliError(f"{args.spec}: invalid scene spec ({e})") from e
    dest = out.dir(args.out)
    out.claim(dest / "frames")
    out.claim(dest / "labels.csv")
    frame_dir, label_path = write_scene(spec, dest)
    print(f"wrote {spec.frame_count} frames to {frame_dir} and labels to {label_path}")
    return 0


def cmd_train(args, out: Outputs) -> int:
    config, _ = _config(args)
    frames = _frames(args.frames, config)
    labels = read_labels(args.labels)
    model, per_length = train(frames, labels, config)
    rows = []
    for m, t in per_length.items():
        s = t.summary
        print(f"m={m} positives={s.positive_windows} negatives={s.negative_windows}")
        for c in s.coverage:
            rows.append([m, c["num_variables"], c["rules"], c["positives_covered"],
                         s.positive_segments, f"{c['multi_positive_share']:.6f}"])
        if s.rules == 0:
            print(f"warning: m={m}: empty rule set (no confidence-1 rule)", file=sys.stderr)
    header = ["window_s", "num_variables", "rules", "positives_covered", "positives",
              "multi_positive_share"]
    if args.report:
        with open(out.claim(args.report), "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(header)
            wr.writerows(rows)
    else:
        wr = csv.writer(sys.stdout)
        wr.writerow(header)
        wr.writerows(rows)
    model.save(out.claim(args.model))
    return 0


def _load_model(path) -> DetectorModel:
    if not Path(path).is_file():
        raise CliError(f"model file not found: {path}")
    try:
        return DetectorModel.load(path)
    except (json.JSONDecodeError, KeyError) as e:
        raise CliError(f"{path}: not a valid model file ({e})") from e


def cmd_detect(args, out: Outputs) -> int:
    model = _load_model(args.model)
    config, user = _config(args, base=model.settings)
    model.check({k: v for k, v in user.items() if k in MODEL_KEYS})
    frames = _frames(args.frames, config)
    timeline = detect_stream(model, frames, config.fps, config.threads)
    dest = out.dir(args.out)
    timeline.write_csv(out.claim(dest / "detections.csv"))
    timeline.write_union_csv(out.claim(dest / "union.csv"))
    out.claim(dest / "timeline.svg").write_text(timeline_svg(timeline))
    hits = sum(timeline.union_row())
    print(f"{hits} of {timeline.seconds} seconds flagged")
    return 0


def cmd_baseline(args, out: Outputs) -> int:
    config, _ = _config(args)
    m = args.window_s
    if m not in FORMULAS:
        raise CliError(f"no baseline formula for {m} s windows")
    formula = FORMULAS[m]
    frames = _frames(args.frames, config)
    labels = read_labels(args.labels)
    rows = []
    for win in partition_windows(frames, config.fps, m, config.stride_s):
        a = analyze_window(win, config)
        box = window_truth(labels, win.start_frame, win.end_frame)
        v1 = label_positive(a.segmentation.sa if a.features else [], box)
        for fv, actual in zip(a.features, v1):
            rows.append((win.start_frame, fv.segment_id, actual, eval_baseline(formula, fv)))
    if not rows:
        raise CliError("no segments to score")
    finite = [(r[2], r[3]) for r in rows if math.isfinite(r[3])]
    if len(finite) < 2:
        raise CliError("fewer than two finite scores; correlation undefined")
    try:
        r = pearson([f[0] for f in finite], [f[1] for f in finite])
    except ValueError as e:
        raise CliError(str(e)) from e
    with open(out.claim(args.out), "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["start_frame", "segment_id", "actual_v1", "predicted"])
        for start, seg, actual, score in rows:
            wr.writerow([start, seg, actual, repr(float(score))])
    print(f"formula {formula.name} ({m} s): {len(rows)} segments, "
          f"{len(finite)} finite, pearson={r:.6f}")
    return 0


def _window(args, config) -> FrameWindow:
    frames = _frames(args.frames, config)
    n = args.window_s * config.fps
    lo = args.start_frame
    if lo < 1 or lo - 1 + n > frames.shape[0]:
        raise CliError(f"window of {n} frames from frame {lo} exceeds the "
                       f"{frames.shape[0]}-frame stream")
    return FrameWindow(frames[lo - 1:lo - 1 + n], config.fps, args.window_s, lo)


def cmd_dump_merge(args, out: Outputs) -> int:
    config, _ = _config(args)
    a = analyze_window(_window(args, config), config)
    dump_pgm(a.matrix, out.claim(args.out))
    if args.csv:
        dump_csv(a.matrix, out.claim(args.csv))
    return 0


def cmd_dump_segments(args, out: Outputs) -> int:
    config, _ = _config(args)
    a = analyze_window(_window(args, config), config)
    dest = out.dir(args.out)
    h, w = a.matrix.values.shape
    dump_segment_map(a.segmentation, w, h, out.claim(dest / "segments.pgm"))
    dump_segment_csv(a.segmentation.sa, out.claim(dest / "sa.csv"))
    dump_segment_csv(a.segmentation.sb, out.claim(dest / "sb.csv"))
    print(f"status={a.status} sa={len(a.segmentation.sa)} sb={len(a.segmentation.sb)}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="neptune", description="Struggle detection in pool video.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="render a synthetic scene from a JSON spec")
    s.add_argument("spec")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("train", help="train a model from frames and labels")
    s.add_argument("--frames", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--model", required=True, help="model JSON to write")
    s.add_argument("--report", help="coverage CSV (default: stdout)")
    _add_config_flags(s)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("detect", help="run a model over a frame stream")
    s.add_argument("--frames", required=True)
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True, help="output directory")
    _add_config_flags(s)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("baseline", help="score segments with a linear baseline formula")
    s.add_argument("--frames", required=True)
    s.add_argument("--labels", required=True)
    s.add_argument("--window-s", type=int, required=True)
    s.add_argument("--out", required=True, help="report CSV")
    _add_config_flags(s)
    s.set_defaults(func=cmd_baseline)

    for name, func, help_ in (("dump-merge", cmd_dump_merge, "write one merged matrix as PGM"),
                              ("dump-segments", cmd_dump_segments, "write one window's segments")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--frames", required=True)
        s.add_argument("--start-frame", type=int, default=1)
        s.add_argument("--window-s", type=int, default=1)
        s.add_argument("--out", required=True)
        if name == "dump-merge":
            s.add_argument("--csv", help="also write the values as CSV")
        _add_config_flags(s)
        s.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    out = Outputs()
    try:
        return args.func(args, out)
    except (CliError, FrameError, TrainingError, ModelMismatch, ValueError, OSError) as e:
        out.rollback()
        print(f"neptune {args.command}: error: {e}", file=sys.stderr)
        return 1
    except BaseException:
        out.rollback()
        raise


if __name__ == "__main__":
    sys.exit(main())
