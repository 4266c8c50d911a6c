"""Batch command-line frontend.

Every command prints one machine-readable JSON document (with a
``"schema": 1`` marker) to stdout and diagnostics to stderr. Exit codes:
0 success, 1 I/O failure, 2 validation or parse failure. Re-running a
command on identical inputs produces byte-identical JSON.

``seg-eval``, ``trace-eval`` and ``tasl`` also accept ``--pred-dir`` /
``--gt-dir`` batch mode: files are paired by stem, entries are isolated
(a malformed file only fails its own entry), results are emitted in
sorted stem order, and the ``SKELTOP_THREADS`` environment variable caps
the worker pool.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import inflate as inflate_mod
from . import swc as swc_mod
from . import synth as synth_mod
from .errors import SkeltopError, ValidationError
from .losses import DeepSupervisionConfig, ScaleLoss, default_scale_weights, total_loss
from .segmetrics import evaluate_segmentation
from .skeleton import graph_from_skeleton, skeletonize
from .skeleton_loss import SkeletonLossWeights, skeleton_loss
from .tracemetrics import evaluate_trace
from .volume import PROBABILITY, Volume3D, read_volume, threshold, write_volume

SCHEMA = 1
VOLUME_EXTENSIONS = (".json", ".nrrd")


def _thread_cap() -> int:
    raw = os.environ.get("SKELTOP_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"SKELTOP_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError(f"SKELTOP_THREADS must be >= 1, got {n}")
    return n


def _binarize(vol: Volume3D, tau: float) -> Volume3D:
    return threshold(vol, tau) if vol.kind == PROBABILITY else vol


def _emit(payload) -> None:
    sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _volume_stems(directory):
    stems = {}
    for name in sorted(os.listdir(directory)):
        if name.endswith(VOLUME_EXTENSIONS):
            stems[name.rsplit(".", 1)[0]] = os.path.join(directory, name)
    return stems


def _swc_stems(directory):
    stems = {}
    for name in sorted(os.listdir(directory)):
        if name.endswith(".swc"):
            stems[name[:-4]] = os.path.join(directory, name)
    return stems


def _run_batch(pred_stems, gt_stems, evaluate_pair):
    """Evaluate matching stems concurrently; one error entry per bad file."""
    order = sorted(pred_stems)

    def run_one(stem):
        if stem not in gt_stems:
            return {"stem": stem, "error": "no matching ground-truth file"}
        try:
            result = evaluate_pair(pred_stems[stem], gt_stems[stem])
        except (SkeltopError, OSError) as exc:
            return {"stem": stem, "error": str(exc)}
        return {"stem": stem, **result}

    with ThreadPoolExecutor(max_workers=_thread_cap()) as pool:
        results = list(pool.map(run_one, order))
    return {"schema": SCHEMA, "results": results}


def _require_pair_mode(args, parser):
    single = args.pred is not None and args.gt is not None
    batch = args.pred_dir is not None and args.gt_dir is not None
    if single == batch:
        parser.error("provide either --pred/--gt or --pred-dir/--gt-dir")
    return single


# ---------------------------------------------------------------------------
# Command handlers

def _cmd_seg_eval(args, parser):
    def evaluate_pair(pred_path, gt_path):
        pred = _binarize(read_volume(pred_path), args.tau)
        gt = read_volume(gt_path)
        report = evaluate_segmentation(pred, gt)
        return {**report.to_json_obj(), "params": {"tau": args.tau}}

    if _require_pair_mode(args, parser):
        return {"schema": SCHEMA, **evaluate_pair(args.pred, args.gt)}
    return _run_batch(_volume_stems(args.pred_dir), _volume_stems(args.gt_dir), evaluate_pair)


def _cmd_trace_eval(args, parser):
    def evaluate_pair(pred_path, gt_path):
        report = evaluate_trace(swc_mod.load_swc(pred_path), swc_mod.load_swc(gt_path),
                                theta=args.theta, resample_step=args.resample)
        return report.to_json_obj()

    if _require_pair_mode(args, parser):
        return {"schema": SCHEMA, **evaluate_pair(args.pred, args.gt)}
    return _run_batch(_swc_stems(args.pred_dir), _swc_stems(args.gt_dir), evaluate_pair)


def _parse_weights(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError(f"--weights expects three comma-separated values, got {text!r}")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ValidationError(f"--weights values must be numbers, got {text!r}") from None


def _cmd_tasl(args, parser):
    lam = _parse_weights(args.weights)
    weights = SkeletonLossWeights(lambda_node=lam[0], lambda_edge=lam[1], lambda_path=lam[2],
                                  epsilon=args.eps, tau=args.tau, r=args.r)

    def evaluate_pair(pred_path, gt_path):
        breakdown = skeleton_loss(read_volume(pred_path), read_volume(gt_path), weights)
        return {
            "l_node": breakdown.l_node,
            "l_edge": breakdown.l_edge,
            "l_path": breakdown.l_path,
            "total": breakdown.total,
            "degenerate": breakdown.degenerate,
            "params": {"tau": args.tau, "r": args.r, "weights": list(lam), "eps": args.eps},
        }

    if _require_pair_mode(args, parser):
        return {"schema": SCHEMA, **evaluate_pair(args.pred, args.gt)}
    return _run_batch(_volume_stems(args.pred_dir), _volume_stems(args.gt_dir), evaluate_pair)


def _cmd_loss(args, parser):
    with open(args.scales, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.scales}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "scales" not in doc:
        raise ValidationError(f"{args.scales}: expected an object with a 'scales' array")
    try:
        scales = [ScaleLoss(float(s["dice"]), float(s["ce"]), float(s["tasl"]))
                  for s in doc["scales"]]
    except (KeyError, TypeError) as exc:
        raise ValidationError(
            f"{args.scales}: each scale needs numeric 'dice', 'ce', 'tasl' fields ({exc})") from None
    weights = doc.get("scale_weights")
    if weights is None:
        weights = default_scale_weights(len(scales))
    cfg = DeepSupervisionConfig(scale_weights=tuple(float(w) for w in weights),
                                beta=float(doc.get("beta", 1.0)))
    value = total_loss(scales, cfg)
    return {"schema": SCHEMA, "total": value, "beta": cfg.beta,
            "scale_weights": list(cfg.scale_weights), "n_scales": len(scales)}


def _cmd_skeletonize(args, parser):
    vol = read_volume(args.input)
    skel = skeletonize(_binarize(vol, args.tau))
    write_volume(skel, args.out)
    return {"schema": SCHEMA, "out": args.out,
            "foreground_in": vol.foreground_count() if vol.kind != PROBABILITY else None,
            "foreground_out": skel.foreground_count()}


def _cmd_graph(args, parser):
    vol = read_volume(args.input)
    graph = graph_from_skeleton(_binarize(vol, args.tau), args.r)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(graph.to_json_obj(), fh, indent=2)
        fh.write("\n")
    return {"schema": SCHEMA, "out": args.out,
            "nodes": graph.n_nodes, "edges": graph.n_edges, "r": args.r}


def _cmd_inflate(args, parser):
    kernel = inflate_mod.read_kernel2d(args.kernel)
    if args.mode == "center":
        k3 = inflate_mod.inflate_center(kernel, args.kd)
    else:
        k3 = inflate_mod.inflate_average(kernel, args.kd)
    inflate_mod.write_tensor(k3.weights, args.out)
    return {"schema": SCHEMA, "out": args.out, "mode": args.mode,
            "kd": args.kd, "shape": list(k3.shape)}


def _cmd_inflate_verify(args, parser):
    kernel = inflate_mod.read_kernel2d(args.kernel)
    vol = read_volume(args.volume)
    c_in = kernel.shape[1]
    field = np.repeat(vol.data.astype(np.float64)[None, ...], c_in, axis=0)
    center_res = inflate_mod.center_inflation_residual(field, kernel, args.kd)
    average_res = inflate_mod.average_inflation_residual(field, kernel, args.kd)
    center_mass = float(np.abs(
        inflate_mod.inflate_center(kernel, args.kd).depth_sum() - kernel.weights).max())
    average_mass = float(np.abs(
        inflate_mod.inflate_average(kernel, args.kd).depth_sum() - kernel.weights).max())
    return {
        "schema": SCHEMA,
        "kd": args.kd,
        "center_max_residual": center_res,
        "average_interior_max_residual": average_res,
        "center_depth_sum_max_error": center_mass,
        "average_depth_sum_max_error": average_mass,
    }


def _cmd_synth(args, parser):
    with open(args.spec, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{args.spec}: not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or "seed" not in doc:
        raise ValidationError(f"{args.spec}: expected an object with at least a 'seed' field")
    known = {"seed", "dims", "n_branch_points", "segment_length", "tube_radius",
             "noise_sigma", "blur_sigma"}
    unknown = set(doc) - known
    if unknown:
        raise ValidationError(f"{args.spec}: unknown field(s) {sorted(unknown)}")
    kwargs = dict(doc)
    if "dims" in kwargs:
        kwargs["dims"] = tuple(kwargs["dims"])
    if "segment_length" in kwargs:
        kwargs["segment_length"] = tuple(kwargs["segment_length"])
    spec = synth_mod.SynthSpec(**kwargs)
    tree = synth_mod.generate_tree(spec)
    mask, prob = synth_mod.rasterize(tree, spec)
    swc_path = f"{args.out_prefix}.swc"
    mask_path = f"{args.out_prefix}_mask.json"
    prob_path = f"{args.out_prefix}_prob.json"
    swc_mod.save_swc(tree, swc_path)
    write_volume(mask, mask_path)
    write_volume(prob, prob_path)
    return {"schema": SCHEMA, "swc": swc_path, "mask": mask_path, "prob": prob_path,
            "nodes": len(tree), "foreground": mask.foreground_count()}


# ---------------------------------------------------------------------------
# Parser

def _add_pair_arguments(sub):
    sub.add_argument("--pred", help="prediction file")
    sub.add_argument("--gt", help="ground-truth file")
    sub.add_argument("--pred-dir", help="directory of prediction files (batch mode)")
    sub.add_argument("--gt-dir", help="directory of ground-truth files (batch mode)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="skeltop",
        description="Skeleton-topology losses and metrics for 3D volumes and neuron traces")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("seg-eval", help="precision/recall/F1 and HD95 on volumes")
    _add_pair_arguments(p)
    p.add_argument("--tau", type=float, default=0.5,
                   help="threshold applied to probability inputs (default 0.5)")
    p.set_defaults(handler=_cmd_seg_eval)

    p = commands.add_parser("trace-eval", help="esa/dsa/pds on SWC traces")
    _add_pair_arguments(p)
    p.add_argument("--theta", type=float, default=2.0,
                   help="match threshold in voxel units (default 2.0)")
    p.add_argument("--resample", type=float, default=None,
                   help="uniform resampling step before evaluation (off by default)")
    p.set_defaults(handler=_cmd_trace_eval)

    p = commands.add_parser("tasl", help="skeleton-graph topology loss on volumes")
    _add_pair_arguments(p)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--r", type=float, default=2.0, help="graph adjacency radius")
    p.add_argument("--weights", default="1.0,0.5,0.5",
                   help="node,edge,path term weights (default 1.0,0.5,0.5)")
    p.add_argument("--eps", type=float, default=1e-8)
    p.set_defaults(handler=_cmd_tasl)

    p = commands.add_parser("loss", help="deep-supervision total from per-scale inputs")
    p.add_argument("--scales", required=True, help="JSON file with per-scale loss values")
    p.set_defaults(handler=_cmd_loss)

    p = commands.add_parser("skeletonize", help="thin a binary volume")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tau", type=float, default=0.5,
                   help="threshold applied first when the input is a probability volume")
    p.set_defaults(handler=_cmd_skeletonize)

    p = commands.add_parser("graph", help="skeleton voxels to proximity graph JSON")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--r", type=float, default=2.0)
    p.add_argument("--tau", type=float, default=0.5)
    p.set_defaults(handler=_cmd_graph)

    p = commands.add_parser("inflate", help="lift a 2D kernel tensor to 3D")
    inflate_sub = p.add_subparsers(dest="inflate_command")
    p.add_argument("--kernel", help="2D kernel tensor (shape c_out,c_in,k_h,k_w)")
    p.add_argument("--kd", type=int, help="target kernel depth")
    p.add_argument("--mode", choices=("center", "average"), default="center")
    p.add_argument("--out", help="output 3D kernel tensor path")
    p.set_defaults(handler=_cmd_inflate_dispatch)

    v = inflate_sub.add_parser("verify", help="report inflation equivalence residuals")
    v.add_argument("--kernel", required=True)
    v.add_argument("--kd", type=int, required=True)
    v.add_argument("--volume", required=True)
    v.set_defaults(handler=_cmd_inflate_verify)

    p = commands.add_parser("synth", help="generate a synthetic neuron fixture")
    p.add_argument("--spec", required=True, help="JSON SynthSpec file")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(handler=_cmd_synth)

    return parser


def _cmd_inflate_dispatch(args, parser):
    if args.kernel is None or args.kd is None or args.out is None:
        parser.error("inflate requires --kernel, --kd and --out")
    return _cmd_inflate(args, parser)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = args.handler(args, parser)
    except SkeltopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    _emit(payload)
    return 0


if __name__ == "__main__":
    sys.exit(main())
