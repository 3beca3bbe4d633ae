"""Loss arithmetic with the published weights, and random erasing rates over many seeds."""
import numpy as np

from patchwarp.augmentation import EraseConfig, plan_erase, random_erase
from patchwarp.fixtures import make_tpose_fixture
from patchwarp.metrics import LossWeights, mask_loss, perceptual_loss, reconstruction_loss, total_loss
from patchwarp.patching import warp_garment

w = LossWeights()
print("weights", w)
print("total(0, 1, 1, 1) =", total_loss({"gan": 0, "rec": 1, "perc": 1, "mask": 1}))

rng = np.random.default_rng(0)
target = rng.random((64, 64, 3))
coarse = np.clip(target + rng.normal(0, 0.1, target.shape), 0, 1)
fine = np.clip(target + rng.normal(0, 0.03, target.shape), 0, 1)
parts = {
    "gan": 0.7,
    "rec": reconstruction_loss(coarse, fine, target),
    "perc": perceptual_loss(coarse, fine, target),
    "mask": mask_loss(rng.random((64, 64)), rng.random((64, 64)) < 0.5),
}
print({k: round(v, 4) for k, v in parts.items()}, "->", round(total_loss(parts), 3))

img, mask, pose = make_tpose_fixture(0)
g = warp_garment(img, mask, pose, pose).garment
plans = [plan_erase(g, EraseConfig(seed=s)) for s in range(2000)]
print("arm drop rate", np.mean([p.dropped_role is not None for p in plans]))
print("stroke rate  ", np.mean([p.erase_fired for p in plans]))

out = random_erase(g, EraseConfig(seed=3))
print("pixels kept", out.mask.sum(), "of", g.mask.sum())
