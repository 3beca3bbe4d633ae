"""Cut a garment into eight pose-anchored patches, normalise them and re-warp to a new pose."""
import sys
import tempfile
from pathlib import Path

import numpy as np

from patchwarp import io
from patchwarp.fixtures import make_tpose_fixture
from patchwarp.patching import build_patch_layout, quad_union_mask, warp_garment
from patchwarp.roles import CODE_ROLE

img, mask, pose = make_tpose_fixture(seed=0, texture="logo-dot")
print("garment", img.shape, "pixels", mask.sum())

layout = build_patch_layout(pose, "upper")
for role, quad in layout:
    print(f"{role.value:12s} area {quad.area:8.1f}  corners {np.round(quad.as_array(), 1).tolist()}")

# same pose in and out: only seams and resampling separate output from input
res = warp_garment(img, mask, pose, pose)
region = mask & quad_union_mask(layout, mask.shape)
iou = (res.garment.mask & region).sum() / (res.garment.mask | region).sum()
print("identity warp IoU:", round(float(iou), 5))

# raise the left arm; the wrist ends near the top edge, so part of the forearm is clipped
joints = {n: (k.point.x, k.point.y, k.confidence) for n, k in pose.items()}
sx, sy, _ = joints["l_shoulder"]
joints["l_elbow"] = (sx + 55.0, sy - 25.0, 1.0)
joints["l_wrist"] = (sx + 110.0, sy - 45.0, 1.0)
target = type(pose)(joints)

res = warp_garment(img, mask, pose, target)
g = res.garment
roles, counts = np.unique(g.provenance[g.mask], return_counts=True)
for r, c in zip(roles, counts):
    print(f"  {CODE_ROLE[int(r)].value:12s} {c:6d} px")

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
io.write_rgba_png(out / "warped_garment.png", g.image)
io.atomic_write_bytes(out / "provenance.png", io.provenance_png_bytes(g.provenance))
for p in res.patches:
    io.write_rgba_png(out / f"normalized_{p.role.value}.png", p.pixels)
print("images written to", out)
