"""Where the warped garment misses the predicted shape, fill features with the aligned mean."""
import numpy as np

from patchwarp.alignment import alignment_visualization, compute_alignment, inpaint_features
from patchwarp.fixtures import make_tpose_fixture, random_projection_encoder
from patchwarp.patching import warp_garment

img, mask, pose = make_tpose_fixture(seed=1, texture="stripes")

# warped garment for a slightly shifted pose, and a predicted shape that is the source mask
res = warp_garment(img, mask, pose, pose.translated(6, 4))
m_t = res.garment.mask
m_g = mask
masks = compute_alignment(m_g, m_t)
print("predicted", m_g.sum(), "warped", m_t.sum())
print("aligned", masks.aligned.sum(), "to inpaint", masks.misaligned.sum(), "to remove", (m_t & ~m_g).sum())

# toy 8-channel features at quarter resolution
f = random_projection_encoder(res.garment.image, channels=8, stride=4)
small = masks.resized(f.shape[1:])
f_in = inpaint_features(f, small)
print("feature grid", f.shape, "misaligned cells", small.misaligned.sum())
print("aligned channel means:", np.round(f[:, small.aligned].mean(axis=1), 4))
print("filled values        :", np.round(f_in[:, small.misaligned][:, 0], 4))
print("untouched elsewhere  :", np.array_equal(f_in[:, ~small.misaligned], f[:, ~small.misaligned]))

vis = alignment_visualization(m_g, m_t)
print("visualisation colours:", np.unique(vis.reshape(-1, 3), axis=0).astype(float).round(2).tolist())
