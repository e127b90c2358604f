"""Command-line driver.

Subcommands: sort, plan, masks, degrade, restore, weights, eval.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import degrade as deg
from .errors import ContractViolation, ValidationError
from .fileio import (ensure_dir, list_images, read_frame, read_mask, read_pose_file, read_rgba,
                     write_frame, write_mask)
from .geometry import PoseSet
from .lossweights import SYMMETRIC, VERBATIM, compute_weights
from .manifest import read_manifest, write_manifest
from .maskkit import DEFAULT_LATENT_FACTOR, downsample_mask, make_inpaint_masks
from .metrics import evaluate
from .scheduler import DEFAULT_F, batch_params, build_manifest, make_restorer, run_pipeline
from .threadpose import sort_poses

log = logging.getLogger("mvrestore")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--f", type=int, default=DEFAULT_F, help="frames per restorer call (default 25)")
    p.add_argument("--omega-r", type=float, default=0.5, help="rotation weight in the pose distance")
    p.add_argument("--lambda", dest="lam", type=float, default=0.98, help="consistency-loss ratio")
    p.add_argument("--style-index", type=int, default=0,
                   help="initial style image, as a position among the first batch")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _poses_for_images(pose_path, image_paths, omega_r):
    """Pose set re-indexed to follow ``image_paths``; poses are matched by file name."""
    pose_set, names = read_pose_file(pose_path, weight_r=omega_r)
    by_name = dict(zip(names, pose_set.poses))
    poses = []
    for i, p in enumerate(image_paths):
        pose = by_name.get(p.name)
        if pose is None:
            raise ValidationError(f"no pose for image {p.name}")
        poses.append(type(pose)(pose.rotation, pose.translation, i))
    return PoseSet.from_poses(poses, weight_r=omega_r)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_sort(args):
    pose_set, names = read_pose_file(args.poses, weight_r=args.omega_r)
    init = "random" if args.init == "random" else int(args.init)
    traj = sort_poses(pose_set, init=init, seed=args.seed)
    doc = {
        "order": list(traj.order),
        "names": [names[i] for i in traj.order],
        "neighbor_distances": list(traj.neighbor_distances),
        "scale_r": pose_set.scale_r,
        "scale_t": pose_set.scale_t,
        "omega_r": pose_set.weight_r,
    }
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_plan(args):
    paths = list_images(args.images)
    if len(paths) < 2:
        raise ValidationError("plan needs at least 2 images")
    if len(paths) > args.f:
        raise ValidationError(f"{len(paths)} images do not fit in f={args.f} frames")
    frames = [read_frame(p) for p in paths]
    if args.poses:
        pose_set = _poses_for_images(args.poses, paths, args.omega_r)
        dist = pose_set.distance_matrix()
        d = [float(dist[i, i + 1]) for i in range(len(paths) - 1)]
    else:
        d = [1.0] * (len(paths) - 1)
    manifest, plan = build_manifest(frames, list(range(len(paths))), list(range(len(paths))), d,
                                    args.f, args.style_index)
    path = write_manifest(manifest, args.out)
    print(json.dumps({"manifest": str(path), "zero_counts": list(plan.zero_counts),
                      "image_slots": list(plan.image_slot_indices)}))
    return 0


def cmd_masks(args):
    manifest = read_manifest(args.manifest)
    h, w = manifest.resolution
    occ_dir = Path(args.occlusion) if args.occlusion else None
    for slot in manifest.image_slots if occ_dir is not None else ():
        src = manifest.slots[slot].source_index
        cand = occ_dir / f"{src:03d}.png"
        if cand.is_file():
            m = read_mask(cand)
            if m.shape != (h, w):
                raise ValidationError(f"{cand}: mask shape {m.shape} != frame shape {(h, w)}")
            manifest.inpaint_masks[slot] = m
            manifest.frames[slot] = np.where(m[..., None] == 1, 0, manifest.frames[slot]).astype(np.uint8)
    write_manifest(manifest, manifest.directory)
    if args.latent_factor:
        lat = ensure_dir(Path(manifest.directory) / "latent")
        for i in range(manifest.f):
            write_mask(lat / f"inpaint_{i:03d}.png", downsample_mask(manifest.inpaint_masks[i], args.latent_factor))
            write_mask(lat / f"style_{i:03d}.png", downsample_mask(manifest.style_masks[i], args.latent_factor))
    print(json.dumps({"manifest": str(Path(manifest.directory) / "manifest.json"),
                      "masked_pixels": [int(m.sum()) for m in manifest.inpaint_masks]}))
    return 0


def cmd_degrade(args):
    frames = [read_frame(p) for p in list_images(args.frames)]
    cutouts = [read_rgba(p) for p in list_images(args.cutouts)] if args.cutouts else []
    out = ensure_dir(args.out)
    for j in range(args.count):
        seed = args.seed + j
        pair = deg.make_training_pair(frames, cutouts, seed)
        d = ensure_dir(out / f"pair_{j:04d}")
        for sub in ("initial", "inpaint", "style", "target"):
            ensure_dir(d / sub)
        for i in range(len(pair.initial_video)):
            write_frame(d / "initial" / f"frame_{i:03d}.png", pair.initial_video[i])
            write_mask(d / "inpaint" / f"mask_{i:03d}.png", pair.inpaint_masks[i])
            write_mask(d / "style" / f"mask_{i:03d}.png", pair.style_masks[i])
            write_frame(d / "target" / f"frame_{i:03d}.png", pair.target_video[i])
        (d / "recipe.json").write_text(json.dumps(pair.recipe(), indent=2, sort_keys=True) + "\n")
    print(json.dumps({"pairs": args.count, "out": str(out)}))
    return 0


def cmd_restore(args):
    paths = list_images(args.images)
    frames = [read_frame(p) for p in paths]
    pose_set = _poses_for_images(args.poses, paths, args.omega_r)
    occlusion = None
    if args.occlusion:
        occlusion = {}
        for i, p in enumerate(paths):
            m = Path(args.occlusion) / (p.stem + ".png")
            if m.is_file():
                occlusion[i] = read_mask(m)
    out = ensure_dir(args.out)
    restorer = make_restorer(args.restorer, workdir=out / "_batches" if args.restorer.startswith("external:") else None)
    result = run_pipeline(frames, pose_set, restorer, f=args.f, style_index=args.style_index,
                          init=args.init if args.init == "random" else int(args.init), seed=args.seed,
                          occlusion=occlusion)
    order = result.order
    for pos, src in enumerate(order):
        write_frame(out / (paths[src].stem + ".png"), result.images[pos])
    summary = {"images": len(frames), "order": [paths[i].name for i in order],
               "batches": len(result.batches)}
    if result.params is not None:
        summary.update({"O": result.params.o, "N": result.params.n})
    print(json.dumps(summary))
    return 0


def cmd_weights(args):
    w = compute_weights(args.f, args.n, args.lam, variant=args.variant)
    print(f"omega_c = {w.omega_c:.12g}")
    print(f"omega_n = {w.omega_n:.12g}")
    if args.k:
        bp = batch_params(args.k, args.f)
        print(f"O = {bp.o}")
        print(f"N = {bp.n}")
    return 0


def cmd_eval(args):
    pred_paths = list_images(args.pred)
    gt_paths = list_images(args.gt)
    gt_by_name = {p.name: p for p in gt_paths}
    if sorted(p.name for p in pred_paths) != sorted(gt_by_name):
        raise ValidationError("prediction and reference directories hold different file names")
    preds = [read_frame(p) for p in pred_paths]
    gts = [read_frame(gt_by_name[p.name]) for p in pred_paths]
    report = evaluate(preds, gts, aligned=not args.raw_only, names=[p.name for p in pred_paths])
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="mvrestore", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sort", parents=[common], help="order poses into a trajectory")
    p.add_argument("poses", help="images.txt-style pose file")
    p.add_argument("-o", "--out", help="order file (JSON); stdout when omitted")
    p.add_argument("--init", default="0", help="start position or 'random' (uses --seed)")
    p.set_defaults(func=cmd_sort)

    p = sub.add_parser("plan", parents=[common], help="turn ordered images into a batch manifest")
    p.add_argument("images", help="directory of ordered images (sorted by file name)")
    p.add_argument("--poses", help="pose file used for the gap distances (uniform when omitted)")
    p.add_argument("-o", "--out", required=True, help="manifest directory")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("masks", parents=[common], help="attach occlusion masks to a manifest")
    p.add_argument("manifest", help="manifest.json or its directory")
    p.add_argument("--occlusion", help="directory of <source_index:03d>.png occlusion masks")
    p.add_argument("--latent-factor", type=int, default=DEFAULT_LATENT_FACTOR,
                   help="also write max-pooled masks at this factor (0 to skip)")
    p.set_defaults(func=cmd_masks)

    p = sub.add_parser("degrade", parents=[common], help="synthesise training pairs")
    p.add_argument("frames", help="directory of clean frames (>= 25)")
    p.add_argument("--cutouts", help="directory of RGBA occluder cutouts")
    p.add_argument("--count", type=int, default=1, help="number of pairs (seeds seed..seed+count-1)")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_degrade)

    p = sub.add_parser("restore", parents=[common], help="run the batch restoration loop")
    p.add_argument("images", help="directory of input images")
    p.add_argument("--poses", required=True, help="images.txt-style pose file")
    p.add_argument("--restorer", default="identity",
                   help="identity | affine-style | external:<command>")
    p.add_argument("--occlusion", help="directory of occlusion masks named like the images")
    p.add_argument("--init", default="0", help="ordering start position or 'random'")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("weights", parents=[common], help="print consistency-loss weights")
    p.add_argument("--n", type=int, required=True, help="conditioned frames per video")
    p.add_argument("--variant", choices=[VERBATIM, SYMMETRIC], default=VERBATIM)
    p.add_argument("--k", type=int, help="also print batch sizing for K images")
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("eval", parents=[common], help="PSNR/SSIM, raw and affine-aligned")
    p.add_argument("pred")
    p.add_argument("gt")
    p.add_argument("--raw-only", action="store_true")
    p.add_argument("-o", "--out", help="write the JSON report here too")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, ContractViolation, OSError) as exc:
        print(f"mvrestore {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
