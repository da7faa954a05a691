"""The ``omnivqa`` command.

Subcommands
-----------
metrics   per-frame and pooled objective scores of an impaired sequence
weights   write I-HM / O-HM / I-EM maps from trace files as OVWM rasters
convert   resample a raw video to another projection
scores    MOS/DMOS from raw subjective ratings
eval      logistic fit and correlation of pooled metrics against DMOS
train     fit the patch-based model to DMOS

Every subcommand accepts ``--config FILE`` with ``key = value`` lines
named after the long flags; flags given on the command line win.  Exit
status is 0 on success, 2 on bad input and 3 on numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import re
import sys
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import metrics as M
from . import percmodel, subjective
from .media_io import (
    VideoMeta,
    count_frames,
    read_frame,
    read_frame_planes,
    read_weight_map,
    write_frame,
    write_weight_map,
)
from .projection import ASPECT, ProjectionKind, resample_frame, uniform_samples
from .sphere import Fov
from .traces import align_to_frames, read_trace
from .weights import DEFAULT_SIGMA, i_em_map, i_hm_map, o_hm_map, subject_frame_maps

log = logging.getLogger("omnivqa")

EXIT_INPUT = 2
EXIT_NUMERIC = 3

METRIC_COLUMNS = ("sequence", "frame", "metric", "value")
EVAL_COLUMNS = ("metric", "group", "n", "pcc", "srcc", "rmse", "mae")
_MAP_NAME = re.compile(r"^(ihm|iem|ohm)(?:_(.+))?_f(\d+)\.ovwm$")


class NumericFailure(RuntimeError):
    pass


# -- argument plumbing ----------------------------------------------------------

def _video_args(p):
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--proj", choices=[k.value for k in ProjectionKind], default="erp")


def _behavior_args(p):
    p.add_argument("--traces", type=Path, help="directory of per-subject trace files")
    p.add_argument("--absolute-time", action="store_true",
                   help="trace timestamps are absolute milliseconds, not intervals")
    p.add_argument("--fov-h", type=float, default=110.0)
    p.add_argument("--fov-v", type=float, default=110.0)
    p.add_argument("--sigma", type=float, default=DEFAULT_SIGMA)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="omnivqa", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", help="objective metrics of one impaired sequence")
    p.add_argument("--config", type=Path)
    p.add_argument("--ref", type=Path)
    p.add_argument("--imp", type=Path)
    p.add_argument("--sequence", help="sequence id written to the CSV (default: impaired file stem)")
    _video_args(p)
    p.add_argument("--metric", action="append", choices=M.METRIC_NAMES,
                   help="repeatable; default psnr")
    _behavior_args(p)
    p.add_argument("--hm-maps", type=Path, help="directory of ihm_/ohm_ OVWM maps")
    p.add_argument("--em-maps", type=Path, help="directory of iem_ OVWM maps")
    p.add_argument("--spsnr-points", type=int, default=M.DEFAULT_SPSNR_POINTS)
    p.add_argument("--downsample-width", type=int,
                   help="resize frames and maps to this width before scoring (default: native)")
    p.add_argument("--frame-interval", type=int, default=1, help="score every k-th frame")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--append", action="store_true", help="append rows to an existing CSV")
    p.add_argument("--out", default="-")

    p = sub.add_parser("weights", help="behavior weight maps from traces")
    p.add_argument("--config", type=Path)
    _video_args(p)
    p.add_argument("--frames", type=int, help="frame count (default: from --ref)")
    p.add_argument("--ref", type=Path)
    _behavior_args(p)
    p.add_argument("--mode", choices=("i-hm", "o-hm", "i-em"), default="i-hm")
    p.add_argument("--out", type=Path)

    p = sub.add_parser("convert", help="projection conversion of a raw video")
    p.add_argument("--config", type=Path)
    p.add_argument("--ref", type=Path, help="input video")
    _video_args(p)
    p.add_argument("--to-proj", choices=[k.value for k in ProjectionKind])
    p.add_argument("--to-width", type=int)
    p.add_argument("--to-height", type=int)
    p.add_argument("--out", type=Path)

    p = sub.add_parser("scores", help="MOS/DMOS from raw ratings")
    p.add_argument("--config", type=Path)
    p.add_argument("--ratings", type=Path, help="CSV: subject, sequence, score")
    p.add_argument("--references", type=Path, help="CSV: sequence, reference[, group]")
    p.add_argument("--no-reject", action="store_true", help="skip subject screening")
    p.add_argument("--out", default="-")

    p = sub.add_parser("eval", help="correlate pooled metrics with DMOS")
    p.add_argument("--config", type=Path)
    p.add_argument("--scores", type=Path, help="metrics CSV")
    p.add_argument("--dmos", type=Path, help="CSV: sequence, dmos[, group]")
    p.add_argument("--out", default="-")

    p = sub.add_parser("train", help="fit the patch-based model")
    p.add_argument("--config", type=Path)
    p.add_argument("--manifest", type=Path,
                   help="CSV: sequence, ref, imp, dmos, hm_maps[, em_maps]")
    _video_args(p)
    p.add_argument("--patches", type=int, default=32, help="patches per sequence")
    p.add_argument("--downsample-width", type=int, default=percmodel.TARGET_WIDTH)
    p.add_argument("--frame-interval", type=int, default=percmodel.FRAME_INTERVAL)
    p.add_argument("--train-config", type=Path, help="key=value optimizer settings")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="parameter file")
    p.add_argument("--predictions", default=None, help="CSV of fitted scores")

    return parser


def _read_config(path: Path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None) is None:
        return args
    config = _read_config(args.config)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    dests = {a.dest: a for a in subparser._actions}
    defaults, lists = {}, {}
    for key, value in config.items():
        action = dests.get(key)
        if action is None:
            raise ValueError(f"{args.config}: unknown setting {key!r} for {args.command}")
        if isinstance(action, argparse._AppendAction):
            # list defaults would be extended by the flag, so apply them afterwards
            items = [v.strip() for v in value.split(",") if v.strip()]
            bad = [v for v in items if action.choices and v not in action.choices]
            if bad:
                raise ValueError(f"{args.config}: invalid {key} value(s) {bad}")
            lists[key] = items
        elif isinstance(action, argparse._StoreTrueAction):
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = value  # argparse converts string defaults via type
    subparser.set_defaults(**defaults)
    args = parser.parse_args(argv)
    for key, items in lists.items():
        if getattr(args, key) is None:
            setattr(args, key, items)
    return args


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise ValueError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _meta(args, frame_count=1) -> VideoMeta:
    _require(args, "width", "height")
    return VideoMeta(args.width, args.height, args.fps, frame_count, args.proj)


@contextmanager
def _text_out(target, append=False):
    if target in (None, "-"):
        yield sys.stdout
        return
    path = Path(target)
    with open(path, "a" if append else "w", newline="") as fh:
        yield fh


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


# -- behavior maps -----------------------------------------------------------

class BehaviorSource:
    """Per-frame I-HM / O-HM / I-EM maps from traces or OVWM directories."""

    def __init__(self, meta: VideoMeta, fov: Fov, sigma: float, traces=None, hm_dir=None,
                 em_dir=None, absolute_time=False):
        self.meta, self.fov, self.sigma = meta, fov, sigma
        self.samples = []
        if traces is not None:
            files = sorted(p for p in Path(traces).iterdir() if p.is_file() and not p.name.startswith("."))
            if not files:
                raise ValueError(f"no trace files in {traces}")
            for path in files:
                trace = read_trace(path, absolute_time=absolute_time)
                self.samples.append(align_to_frames(trace, meta))
        self.files = {"ihm": defaultdict(list), "iem": defaultdict(list), "ohm": {}}
        for directory in (hm_dir, em_dir):
            if directory is not None:
                self._scan(Path(directory))

    def _scan(self, directory: Path):
        for path in sorted(directory.iterdir()):
            m = _MAP_NAME.match(path.name)
            if not m:
                continue
            values, frame = read_weight_map(path)
            if values.shape != (self.meta.height, self.meta.width):
                raise ValueError(f"{path}: map is {values.shape[1]}x{values.shape[0]}, "
                                 f"video is {self.meta.width}x{self.meta.height}")
            values = values.astype(float)
            if m.group(1) == "ohm":
                self.files["ohm"][frame] = values
            else:
                self.files[m.group(1)][frame].append(values)

    def hm_maps(self, frame: int) -> list[np.ndarray]:
        if self.samples:
            return [subject_frame_maps(s, frame, self.fov, self.meta, self.sigma)[0] for s in self.samples]
        return self.files["ihm"].get(frame, [])

    def em_maps(self, frame: int) -> list[Optional[np.ndarray]]:
        if self.samples:
            out = []
            for s in self.samples:
                g = s.gaze_sample(frame)
                out.append(None if g is None else i_em_map(g.pose, g.gaze, self.sigma, self.fov, self.meta))
            return out
        return self.files["iem"].get(frame, [])

    def o_hm(self, frame: int) -> np.ndarray:
        if not self.samples and frame in self.files["ohm"]:
            values = self.files["ohm"][frame]
            mass = values.sum()
            if not mass > 0:
                raise ValueError(f"O-HM map of frame {frame} carries no weight")
            return values / mass
        return o_hm_map(self.hm_maps(frame))


# -- metrics -------------------------------------------------------------------

def _shrinker(meta: VideoMeta, width: Optional[int]):
    """Return a function resizing full-resolution planes to ``width`` (identity if unset)."""
    if width is None or width == meta.width:
        return lambda plane: plane
    if width < 1:
        raise ValueError("--downsample-width must be positive")
    height = max(1, int(round(meta.height * width / meta.width)))
    return lambda plane: percmodel.resize_plane(plane, width, height)


def cmd_metrics(args) -> int:
    _require(args, "ref", "imp")
    probe = _meta(args)
    n_ref = count_frames(args.ref, probe)
    n_imp = count_frames(args.imp, probe)
    if n_ref != n_imp:
        raise ValueError(f"frame counts differ: {n_ref} (ref) vs {n_imp} (imp)")
    if n_ref == 0:
        raise ValueError(f"{args.ref} holds no complete frame")
    meta = _meta(args, n_ref)
    names = list(dict.fromkeys(args.metric or ["psnr"]))
    behavior = [n for n in names if n in M.BEHAVIOR_METRICS]
    source = None
    if behavior:
        if args.traces is None and args.hm_maps is None and args.em_maps is None:
            raise ValueError(f"{', '.join(behavior)} need --traces or --hm-maps/--em-maps")
        source = BehaviorSource(meta, Fov(args.fov_h, args.fov_v), args.sigma, args.traces,
                                args.hm_maps, args.em_maps, args.absolute_time)
    samples = uniform_samples(args.spsnr_points) if "s-psnr" in names else None
    kind = meta.projection
    if args.frame_interval < 1:
        raise ValueError("--frame-interval must be at least 1")
    shrink = _shrinker(meta, args.downsample_width)

    ref_data = args.ref.read_bytes()
    imp_data = args.imp.read_bytes()

    def one_frame(f):
        ref = shrink(read_frame(ref_data, meta, f).astype(float))
        imp = shrink(read_frame(imp_data, meta, f).astype(float))
        row = {}
        for name in names:
            try:
                if name == "psnr":
                    val = M.psnr(ref, imp)
                elif name == "ssim":
                    val = M.ssim(ref, imp)
                elif name == "ws-psnr":
                    val = M.ws_psnr(ref, imp)
                elif name == "s-psnr":
                    val = M.s_psnr(ref, imp, samples, kind)
                elif name == "cpp-psnr":
                    val = M.cpp_psnr(ref, imp, kind)
                elif name == "psnr-i-hm":
                    val = M.psnr_i_hm(ref, imp, [shrink(m) for m in source.hm_maps(f)])
                elif name == "psnr-o-hm":
                    o_map = shrink(source.o_hm(f))
                    val = M.psnr_o_hm(ref, imp, o_map / o_map.sum())
                else:
                    val = M.psnr_i_em(ref, imp, [None if m is None else shrink(m)
                                                 for m in source.em_maps(f)])
            except M.MetricError as exc:
                if name in M.BEHAVIOR_METRICS and "no usable" in str(exc):
                    log.warning("frame %d: %s skipped (%s)", f, name, exc)
                    continue
                raise
            if not math.isfinite(val):
                raise NumericFailure(f"frame {f}: {name} is {val}")
            row[name] = val
        return row

    frames = range(0, meta.frame_count, args.frame_interval)
    if args.workers > 1:
        with ThreadPoolExecutor(args.workers) as pool:
            results = list(pool.map(one_frame, frames))
    else:
        results = [one_frame(f) for f in frames]

    sequence = args.sequence or args.imp.stem
    exists = args.append and args.out != "-" and Path(args.out).exists() and Path(args.out).stat().st_size > 0
    with _text_out(args.out, args.append) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if not exists:
            writer.writerow(METRIC_COLUMNS)
        for f, row in zip(frames, results):
            for name in names:
                if name in row:
                    writer.writerow([sequence, f, name, _fmt(row[name])])
        for name in names:
            vals = [row[name] for row in results if name in row]
            if not vals:
                raise ValueError(f"{name}: no frame could be scored")
            writer.writerow([sequence, "pooled", name, _fmt(M.pool_sequence(vals))])
    return 0


# -- weights -------------------------------------------------------------------

def cmd_weights(args) -> int:
    _require(args, "traces", "out")
    if args.frames is None:
        _require(args, "ref")
        frames = count_frames(args.ref, _meta(args))
    else:
        frames = args.frames
    meta = _meta(args, frames)
    fov = Fov(args.fov_h, args.fov_v)
    source = BehaviorSource(meta, fov, args.sigma, args.traces, absolute_time=args.absolute_time)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = 0
    for f in range(meta.frame_count):
        if args.mode == "o-hm":
            write_weight_map(source.o_hm(f), out / f"ohm_f{f:05d}.ovwm", f)
            written += 1
            continue
        for s in source.samples:
            if args.mode == "i-hm":
                write_weight_map(i_hm_map(s.first_pose(f), fov, meta), out / f"ihm_{s.subject}_f{f:05d}.ovwm", f)
                written += 1
            else:
                g = s.gaze_sample(f)
                if g is None:
                    continue
                em = i_em_map(g.pose, g.gaze, args.sigma, fov, meta)
                write_weight_map(em, out / f"iem_{s.subject}_f{f:05d}.ovwm", f)
                written += 1
    if written == 0:
        log.warning("no valid eye-movement samples; no maps written")
    log.info("wrote %d maps to %s", written, out)
    return 0


# -- convert -------------------------------------------------------------------

def cmd_convert(args) -> int:
    _require(args, "ref", "to_proj", "out")
    probe = _meta(args)
    n = count_frames(args.ref, probe)
    if n == 0:
        raise ValueError(f"{args.ref} holds no complete frame")
    meta = _meta(args, n)
    dst = ProjectionKind.parse(args.to_proj)
    aw, ah = ASPECT[dst]
    # default width: the source width rounded down to fit the target aspect ratio
    dst_w = args.to_width or max(aw, meta.width // aw * aw)
    dst_h = args.to_height or dst_w * ah // aw
    src_kind = meta.projection
    data = args.ref.read_bytes()
    with open(args.out, "wb") as fh:
        for f in range(n):
            y, u, v = read_frame_planes(data, meta, f)
            y2 = resample_frame(y.astype(float), src_kind, dst, dst_w, dst_h)
            cw, ch = (dst_w + 1) // 2, (dst_h + 1) // 2
            try:
                u2 = resample_frame(u.astype(float), src_kind, dst, cw, ch)
                v2 = resample_frame(v.astype(float), src_kind, dst, cw, ch)
            except ValueError:
                # odd chroma sizes break the projection's aspect; keep neutral colour
                u2 = v2 = None
            write_frame(fh, y2, u2, v2)
    log.info("converted %d frames to %s %dx%d", n, dst.value, dst_w, dst_h)
    return 0


# -- scores / eval -------------------------------------------------------------

def _read_csv(path, required) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(required) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return list(reader)


def cmd_scores(args) -> int:
    _require(args, "ratings")
    table = subjective.read_score_csv(args.ratings)
    reference_of, groups = {}, {}
    if args.references is not None:
        for row in _read_csv(args.references, ("sequence", "reference")):
            reference_of[row["sequence"]] = row["reference"]
            if row.get("group"):
                groups[row["sequence"]] = row["group"]
    if groups:
        table.groups = [groups.get(s, groups.get(reference_of.get(s, s), "")) for s in table.sequences]
    if not args.no_reject:
        table, rejected = subjective.reject_subjects(table)
        if rejected:
            log.warning("rejected subjects: %s", ", ".join(rejected))
    q = subjective.dmos(table, reference_of)
    if q.flagged_subjects:
        log.warning("zero-variance subjects: %s", ", ".join(q.flagged_subjects))
    with _text_out(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("sequence", "group", "mos", "dmos", "is_reference"))
        for j, s in enumerate(q.sequences):
            group = table.groups[j] if table.groups else ""
            writer.writerow([s, group, _fmt(float(q.mos[j])), _fmt(float(q.dmos[j])), int(q.is_reference[j])])
    return 0


def cmd_eval(args) -> int:
    _require(args, "scores", "dmos")
    rows = _read_csv(args.scores, ("sequence", "metric", "value"))
    pooled = defaultdict(dict)
    for row in rows:
        if row.get("frame", "pooled") == "pooled":
            pooled[row["metric"]][row["sequence"]] = float(row["value"])
    if not pooled:
        raise ValueError(f"{args.scores}: no pooled metric rows")
    target, group_of = {}, {}
    for row in _read_csv(args.dmos, ("sequence", "dmos")):
        target[row["sequence"]] = float(row["dmos"])
        if row.get("group"):
            group_of[row["sequence"]] = row["group"]

    out_rows = []
    for metric, values in pooled.items():
        unmatched = sorted(set(values) ^ set(target))
        if unmatched:
            raise ValueError(f"{metric}: unmatched sequence ids {unmatched[:5]}")
        seqs = sorted(values)
        x = np.array([values[s] for s in seqs])
        y = np.array([target[s] for s in seqs])
        reports = []
        for group in sorted(set(group_of.get(s, "") for s in seqs) - {""}):
            sel = np.array([group_of.get(s) == group for s in seqs])
            if sel.sum() < 5:
                log.warning("%s: group %s has %d sequences; skipped", metric, group, sel.sum())
                continue
            _, rep = subjective.evaluate_metric(x[sel], y[sel])
            reports.append(rep)
            out_rows.append((metric, group, rep))
        _, rep = subjective.evaluate_metric(x, y)
        if not all(math.isfinite(v) for v in (rep.rmse, rep.mae)):
            raise NumericFailure(f"{metric}: non-finite fit")
        out_rows.append((metric, "all", rep))
        if reports:
            out_rows.append((metric, "mean", subjective.mean_report(reports)))
    with _text_out(args.out) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVAL_COLUMNS)
        for metric, group, r in out_rows:
            writer.writerow([metric, group, r.n] + [_fmt(float(v)) for v in (r.pcc, r.srcc, r.rmse, r.mae)])
    return 0


# -- train ---------------------------------------------------------------------

def _maps_by_frame(directory: Path, meta: VideoMeta, prefixes) -> dict[int, np.ndarray]:
    """Per-frame map from OVWM files: an ``ohm`` file if present, else the mean of the rest."""
    single, many = {}, defaultdict(list)
    for path in sorted(directory.iterdir()):
        m = _MAP_NAME.match(path.name)
        if not m or m.group(1) not in prefixes:
            continue
        values, frame = read_weight_map(path)
        if values.shape != (meta.height, meta.width):
            raise ValueError(f"{path}: size does not match the video")
        if m.group(1) == "ohm":
            single[frame] = values.astype(float)
        else:
            many[frame].append(values.astype(float))
    out = {f: np.mean(v, axis=0) for f, v in many.items()}
    out.update(single)
    return out


def cmd_train(args) -> int:
    _require(args, "manifest", "out")
    config = percmodel.load_config(args.train_config) if args.train_config else percmodel.TrainConfig()
    config = replace(config, seed=args.seed)
    base = args.manifest.parent
    rows = _read_csv(args.manifest, ("sequence", "ref", "imp", "dmos", "hm_maps"))
    rng = np.random.default_rng(args.seed)
    items, names = [], []
    for row in rows:
        ref_path, imp_path = base / row["ref"], base / row["imp"]
        n = count_frames(ref_path, _meta(args))
        meta = _meta(args, n)
        ref_data, imp_data = ref_path.read_bytes(), imp_path.read_bytes()
        keep = range(0, n, args.frame_interval)
        refs = {f: read_frame(ref_data, meta, f) for f in keep}
        imps = {f: read_frame(imp_data, meta, f) for f in keep}
        hm = _maps_by_frame(base / row["hm_maps"], meta, ("ihm", "ohm"))
        em_dir = row.get("em_maps") or ""
        em = _maps_by_frame(base / em_dir, meta, ("iem",)) if em_dir else {}
        for f in keep:
            if f not in hm:
                raise ValueError(f"{row['sequence']}: no HM map for frame {f}")
            em.setdefault(f, hm[f])
        # preprocess walks frames by position, so hand it only the retained frames
        item = percmodel.prepare_sequence(
            [refs[f] for f in keep], [imps[f] for f in keep],
            [hm[f] for f in keep], [em[f] for f in keep], args.patches, float(row["dmos"]),
            rng, args.downsample_width, 1)
        items.append(item)
        names.append(row["sequence"])
    try:
        result = percmodel.train(items, config=config)
    except percmodel.TrainingError as exc:
        raise NumericFailure(str(exc)) from None
    percmodel.save_params(result.model, args.out)
    log.info("final loss %.6g after %d epochs", result.history[-1].total, config.epochs)
    if args.predictions is not None:
        with _text_out(args.predictions) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("sequence", "dmos", "predicted"))
            for name, item in zip(names, items):
                writer.writerow([name, _fmt(item.dmos), _fmt(result.model.predict(item))])
    return 0


COMMANDS = {
    "metrics": cmd_metrics,
    "weights": cmd_weights,
    "convert": cmd_convert,
    "scores": cmd_scores,
    "eval": cmd_eval,
    "train": cmd_train,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except (ValueError, OSError) as exc:
        print(f"omnivqa: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="omnivqa: %(levelname)s: %(message)s")
    logging.captureWarnings(True)
    try:
        return COMMANDS[args.command](args)
    except (NumericFailure, FloatingPointError, percmodel.TrainingError) as exc:
        print(f"omnivqa: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError, KeyError, IndexError) as exc:
        print(f"omnivqa: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
