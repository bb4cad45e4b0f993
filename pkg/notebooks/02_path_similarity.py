"""
Within-group path similarity
============================

Each trajectory gets the median (and SD) of its DTW and discrete Frechet
distances to every other trajectory of the same group.
"""

# %%
import numpy as np

from semtraj.analysis import object_path
from semtraj.distance import group_similarity, pairwise_matrix
from semtraj.synth import BehaviorProfile, builtin_script, generate_group

script = builtin_script("cutting")
tmpl = script.template()
profiles = {"quiet": BehaviorProfile(seed=1, path_noise_sd=0.01), "shaky": BehaviorProfile(seed=2, path_noise_sd=0.05)}
episodes = generate_group(script, profiles, 10)

# %%
# Only the cutting strokes are compared (the template's distance_action).
for cond in profiles:
    paths = [(ep.episode_id, object_path(ep, "knife", tmpl)) for ep in episodes if ep.condition == cond]
    for metric in ("dtw", "dfd"):
        sim = group_similarity(pairwise_matrix(paths, metric))
        med = np.median([s.median for s in sim.values()])
        print(f"{cond:6s} {metric}: median of medians {med:.3f}")

# %%
# Keeping every 4th sample shrinks the matrices' cost by ~16x; DTW values
# shrink too because it sums over aligned pairs.
paths = [(ep.episode_id, object_path(ep, "knife", tmpl)) for ep in episodes if ep.condition == "shaky"]
full = pairwise_matrix(paths, "dtw")
coarse = pairwise_matrix(paths, "dtw", stride=4)
print("corr(full, stride 4) =", np.corrcoef(full.values.ravel(), coarse.values.ravel())[0, 1].round(3))
