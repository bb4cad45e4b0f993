"""
Comparing input conditions
==========================

Three synthetic conditions run the cutting task; every metric gets a
Kruskal-Wallis test, Conover pairs with Holm correction and Cliff's delta.
The pointing task is compared with the parametric battery instead.
"""

# %%
from semtraj.analysis import compare_episodes
from semtraj.report import render_report
from semtraj.stats import compare_groups
from semtraj.metrics import pointing_precision
from semtraj.synth import builtin_script, generate_group, load_profiles
from importlib import resources

profiles = load_profiles(resources.files("semtraj").joinpath("data").joinpath("profiles.toml").read_bytes())
script = builtin_script("cutting")
episodes = generate_group(script, profiles, 20)
report = compare_episodes(episodes, script.template(), group_order=["M", "H", "C"])
print(render_report(report, "markdown"))

# %%
# Pointing precision, per participant mean in cm.
pointing = builtin_script("pointing")
groups = {}
for ep in generate_group(pointing, profiles, 20):
    groups.setdefault(ep.condition, []).append(pointing_precision(ep, pointing.template()).mean * 100)
res = compare_groups(groups, family="parametric")
print(res.family, "Levene p = %.3f" % res.levene_p, "omnibus p = %.2g" % res.omnibus_p, "->", res.direction)
