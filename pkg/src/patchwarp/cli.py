"""Command-line front end.

Exit codes:
    0  success
    1  selfcheck failure
    2  input parse failure (missing or malformed file, bad arguments)
    3  geometry failure (missing joint, degenerate layout or quad)
"""
from __future__ import annotations

import argparse
import hashlib
import io as _stdio
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .alignment import alignment_visualization, compute_alignment
from .augmentation import EraseConfig, apply_plan, plan_erase
from .errors import DegenerateLayout, DimensionMismatch, GeometryError, MissingJoint
from .patching import GarmentKind, LayoutParams, layout_joints, warp_garment

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT, EXIT_GEOMETRY = 0, 1, 2, 3


@dataclass
class JobConfig:
    source_image: Path
    source_mask: Path
    source_pose: Path
    target_pose: Path
    out_dir: Path
    garment_kind: GarmentKind = GarmentKind.UPPER
    layout: LayoutParams = field(default_factory=LayoutParams)
    erase: EraseConfig = field(default_factory=EraseConfig)
    augment: bool = False
    seed: int = 0
    diagnostics: bool = False
    timings: bool = False

    @classmethod
    def from_file(cls, path: Path, **overrides) -> "JobConfig":
        """Load a job JSON; relative paths resolve against the file's directory."""
        try:
            doc = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise io.InputError(path, "no such file")
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise io.InputError(path, f"invalid JSON ({exc})")
        if not isinstance(doc, dict):
            raise io.InputError(path, "config must be a JSON object")
        base = Path(path).parent
        vals = dict(doc)
        vals.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(vals, base, path)

    @classmethod
    def from_dict(cls, vals: dict, base: Path = Path("."), origin="<args>") -> "JobConfig":
        def p(key):
            if not vals.get(key):
                raise io.InputError(origin, f"missing required setting {key!r}")
            q = Path(vals[key])
            return q if q.is_absolute() else base / q
        try:
            seed = int(vals.get("seed", 0))
            erase = dict(vals.get("erase") or {})
            erase["seed"] = seed
            return cls(
                source_image=p("source_image"),
                source_mask=p("source_mask"),
                source_pose=p("source_pose"),
                target_pose=p("target_pose"),
                out_dir=p("out_dir"),
                garment_kind=GarmentKind(vals.get("garment_kind", "upper")),
                layout=LayoutParams(**(vals.get("layout") or {})),
                erase=EraseConfig.from_dict(erase),
                augment=bool(vals.get("augment", False)),
                seed=seed,
                diagnostics=bool(vals.get("diagnostics", False)),
                timings=bool(vals.get("timings", False)),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, io.InputError):
                raise
            raise io.InputError(origin, f"bad setting ({exc})")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _layout_overlay(image: np.ndarray, layout) -> bytes:
    from PIL import Image, ImageDraw

    base = Image.fromarray(io.to_uint8(image), mode="RGBA").convert("RGB")
    draw = ImageDraw.Draw(base)
    for _, q in layout:
        pts = [tuple(p) for p in q.as_array()]
        draw.line(pts + [pts[0]], fill=(255, 0, 0), width=1)
    buf = _stdio.BytesIO()
    base.save(buf, format="PNG")
    return buf.getvalue()


def cmd_warp(cfg: JobConfig, out=None) -> int:
    out = out or sys.stdout
    timings = {}
    t0 = time.perf_counter()
    image = io.read_rgba_png(cfg.source_image)
    mask = io.read_mask_png(cfg.source_mask)
    if image.shape[:2] != mask.shape:
        raise io.InputError(cfg.source_mask, f"size {mask.shape[::-1]} differs from image {image.shape[1::-1]}")
    src_pose = io.read_pose_json(cfg.source_pose)
    dst_pose = io.read_pose_json(cfg.target_pose)
    h, w = mask.shape
    joints = layout_joints(cfg.garment_kind)
    src_pose.check_bounds(w, h, joints)
    dst_pose.check_bounds(w, h, joints)
    # keep the garment coherent: alpha comes from the mask
    image[~mask] = 0.0
    image[mask, 3] = np.maximum(image[mask, 3], 1.0 / 255.0)
    timings["read"] = time.perf_counter() - t0

    t1 = time.perf_counter()
    result = warp_garment(image, mask, src_pose, dst_pose, cfg.garment_kind, cfg.layout)
    garment = result.garment
    timings["warp"] = time.perf_counter() - t1

    erase_info = None
    if cfg.augment:
        plan = plan_erase(garment, cfg.erase)
        garment = apply_plan(garment, plan)
        erase_info = {
            "alpha1": cfg.erase.alpha1,
            "alpha2": cfg.erase.alpha2,
            "dropped_role": plan.dropped_role.value if plan.dropped_role else None,
            "strokes_applied": plan.erase_fired,
        }

    t2 = time.perf_counter()
    files: dict[str, bytes] = {}
    for p in result.patches:
        files[f"normalized_{p.role.value}.png"] = io.rgba_png_bytes(p.pixels)
    files["warped_garment.png"] = io.rgba_png_bytes(garment.image)
    files["warped_mask.png"] = io.mask_png_bytes(garment.mask)
    files["provenance.png"] = io.provenance_png_bytes(garment.provenance)
    if cfg.diagnostics:
        files["layout_source.png"] = _layout_overlay(image, result.source_layout)
        files["layout_target.png"] = _layout_overlay(garment.image, result.target_layout)
    combined = result.combined_homographies()
    manifest = {
        "inputs": {
            name: {"path": str(path), "sha256": _sha256(Path(path))}
            for name, path in (("source_image", cfg.source_image), ("source_mask", cfg.source_mask),
                               ("source_pose", cfg.source_pose), ("target_pose", cfg.target_pose))
        },
        "garment_kind": cfg.garment_kind.value,
        "layout": asdict(cfg.layout),
        "seed": cfg.seed,
        "per_patch": [
            {
                "role": p.role.value,
                "H_s_to_n": p.homography.tolist(),
                "H_n_to_t": wp.homography.tolist(),
                "H_s_to_t": combined[p.role].tolist(),
                "valid_pixels": int(p.validity.sum()),
            }
            for p, wp in zip(result.patches, result.warped)
        ],
        "warped_pixels": int(garment.mask.sum()),
        "erase": erase_info,
    }
    timings["encode"] = time.perf_counter() - t2
    manifest["timings_ms"] = ({k: round(v * 1000.0, 3) for k, v in timings.items()}
                              if cfg.timings else None)
    files["manifest.json"] = (json.dumps(manifest, indent=2) + "\n").encode()

    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    for name, data in files.items():
        io.atomic_write_bytes(cfg.out_dir / name, data)
    print(f"wrote {len(files)} files to {cfg.out_dir} "
          f"({len(result.patches)} patches, {int(garment.mask.sum())} garment pixels)", file=out)
    return EXIT_OK


def cmd_align(m_g_path: Path, m_t_path: Path, out_dir: Path, out=None) -> int:
    out = out or sys.stdout
    m_g = io.read_mask_png(m_g_path)
    m_t = io.read_mask_png(m_t_path)
    if m_g.shape != m_t.shape:
        raise io.InputError(m_t_path, f"size {m_t.shape[::-1]} differs from {m_g_path} {m_g.shape[::-1]}")
    masks = compute_alignment(m_g, m_t)
    files = {
        "aligned.png": io.mask_png_bytes(masks.aligned),
        "misaligned.png": io.mask_png_bytes(masks.misaligned),
        "alignment_vis.png": io.rgb_png_bytes(alignment_visualization(m_g, m_t)),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, data in files.items():
        io.atomic_write_bytes(out_dir / name, data)
    removed = int((m_t & ~m_g).sum())
    print(f"aligned {int(masks.aligned.sum())} px, to inpaint {int(masks.misaligned.sum())} px, "
          f"to remove {removed} px", file=out)
    return EXIT_OK


def cmd_selfcheck(conv_fixture: Optional[Path] = None, out=None) -> int:
    out = out or sys.stdout
    from .selfcheck import format_table, run_checks

    rows = run_checks(conv_fixture)
    print(format_table(rows), file=out)
    failed = [r[0] for r in rows if not r[1]]
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=out)
        return EXIT_CHECK_FAILED
    print("all checks passed", file=out)
    return EXIT_OK


def cmd_make_fixture(out_dir: Path, seed: int, texture: str, offset: Sequence[float], out=None) -> int:
    out = out or sys.stdout
    from .fixtures import write_bundle

    write_bundle(out_dir, seed, texture, tuple(offset))
    print(f"wrote fixture bundle to {out_dir}", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="patchwarp", description="Patch-routed garment warping tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    w = sub.add_parser("warp", help="normalise garment patches and warp them to a target pose")
    w.add_argument("--config", type=Path, help="job JSON; other flags override its settings")
    w.add_argument("--source-image", type=Path)
    w.add_argument("--source-mask", type=Path)
    w.add_argument("--source-pose", type=Path)
    w.add_argument("--target-pose", type=Path)
    w.add_argument("--out", dest="out_dir", type=Path)
    w.add_argument("--kind", dest="garment_kind", choices=[k.value for k in GarmentKind])
    w.add_argument("--seed", type=int)
    w.add_argument("--width-factor", type=float)
    w.add_argument("--augment", action="store_true", default=None,
                   help="apply training-time random erasing")
    w.add_argument("--alpha1", type=float)
    w.add_argument("--alpha2", type=float)
    w.add_argument("--diagnostics", action="store_true", default=None)
    w.add_argument("--timings", action="store_true", default=None,
                   help="record wall-clock timings in the manifest (breaks byte-identical reruns)")

    a = sub.add_parser("align", help="misalignment masks between predicted and warped garment masks")
    a.add_argument("m_g", type=Path, help="predicted garment mask PNG")
    a.add_argument("m_t", type=Path, help="warped garment mask PNG")
    a.add_argument("out_dir", type=Path)

    s = sub.add_parser("selfcheck", help="run the embedded invariant suite")
    s.add_argument("--conv-fixture", type=Path)

    f = sub.add_parser("make-fixture", help="write a synthetic T-pose job bundle")
    f.add_argument("out_dir", type=Path)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--texture", default="checker", choices=["solid", "checker", "stripes", "logo-dot"])
    f.add_argument("--target-offset", type=float, nargs=2, default=(0.0, 0.0), metavar=("DX", "DY"))
    return ap


def _warp_config(args) -> JobConfig:
    overrides = {
        "source_image": args.source_image, "source_mask": args.source_mask,
        "source_pose": args.source_pose, "target_pose": args.target_pose,
        "out_dir": args.out_dir, "garment_kind": args.garment_kind, "seed": args.seed,
        "augment": args.augment, "diagnostics": args.diagnostics, "timings": args.timings,
    }
    erase = {k: v for k, v in (("alpha1", args.alpha1), ("alpha2", args.alpha2)) if v is not None}
    # paths given on the command line are relative to the working directory, not the config file
    for k in ("source_image", "source_mask", "source_pose", "target_pose", "out_dir"):
        if overrides[k] is not None:
            overrides[k] = str(Path(overrides[k]).absolute())
    if args.config is not None:
        cfg = JobConfig.from_file(args.config, **overrides)
        if erase:
            cfg.erase = EraseConfig.from_dict({**asdict(cfg.erase), **erase})
        if args.width_factor is not None:
            cfg.layout = LayoutParams(**{**asdict(cfg.layout), "width_factor": args.width_factor})
        return cfg
    vals = {k: v for k, v in overrides.items() if v is not None}
    if erase:
        vals["erase"] = erase
    if args.width_factor is not None:
        vals["layout"] = {"width_factor": args.width_factor}
    return JobConfig.from_dict(vals)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "warp":
            return cmd_warp(_warp_config(args))
        if args.command == "align":
            return cmd_align(args.m_g, args.m_t, args.out_dir)
        if args.command == "selfcheck":
            return cmd_selfcheck(args.conv_fixture)
        if args.command == "make-fixture":
            return cmd_make_fixture(args.out_dir, args.seed, args.texture, args.target_offset)
    except (io.InputError, DimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MissingJoint as exc:
        print(f"error: geometry: {exc} (joint: {exc.name})", file=sys.stderr)
        return EXIT_GEOMETRY
    except DegenerateLayout as exc:
        named = f" (joints: {', '.join(exc.joints)})" if exc.joints else ""
        print(f"error: geometry: {exc}{named}", file=sys.stderr)
        return EXIT_GEOMETRY
    except GeometryError as exc:
        print(f"error: geometry: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY
    return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
