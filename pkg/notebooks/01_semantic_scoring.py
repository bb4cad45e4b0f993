"""
Scoring an execution against its optimal semantic sequence
==========================================================

A knife recording is split wherever its action set changes, the runs are
compressed to one token each, and the token sequence is compared with the
template by edit distance.
"""

# %%
from semtraj.distance import classify_edits, levenshtein
from semtraj.metrics import action_count, object_action_time
from semtraj.segment import compress
from semtraj.synth import BehaviorProfile, builtin_script, generate_episode

script = builtin_script("cutting")
optimal = script.template().optimal["knife"]
print("optimal:", optimal)

# %%
# A clean execution reproduces the template exactly.
clean, _ = generate_episode(script, BehaviorProfile(seed=1))
knife = clean.trajectories["knife"]
print(len(knife.subs), "runs ->", compress(knife))
print("edit distance", levenshtein(compress(knife), optimal))

# %%
# Dropping the knife once splits the first grasp: two extra tokens.
sloppy, truth = generate_episode(script, BehaviorProfile(seed=1, regrasp_probability=1.0))
observed = compress(sloppy.trajectories["knife"])
dist, edits = levenshtein(observed, optimal, script=True)
print("injected:", truth.injections)
print("distance", dist, classify_edits(edits))
for op in edits:
    if op.kind != "match":
        print("  ", op.kind, "observed token", op.i, sorted(observed[op.i]))

# %%
# Counts and durations come from the same runs.
print("grasps", action_count(sloppy, "knife", "grasp"), "cuts", action_count(sloppy, "knife", "cut"))
print("grasp time %.2f s" % object_action_time(sloppy, "knife", "grasp"))
