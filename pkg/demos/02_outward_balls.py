"""
Outward balls and where they cannot exist
=========================================

A ball that avoids the singular set and touches the test set exists for
isolated singular points, but not when the singular set crosses every
candidate ball.
"""
from bpplab import example_scene, falsify_outward_ball, outward_ball_search
from bpplab.geometry import porosity_check

for name in ("finite_points", "half_cross", "axis_cross", "line_family"):
    scene = example_scene(name)
    for h in (0.1, 0.05):
        res = outward_ball_search(scene, h)
        if res.found:
            print(f"{name:14s} h={h:<5} found: center {res.center}, radius {res.radius:.3f}")
        else:
            rep = falsify_outward_ball(scene, h=h)
            print(f"{name:14s} h={h:<5} {rep.verdict}: "
                  f"{rep.n_witnessed}/{rep.n_candidates} candidate balls contain a singular point")

# porosity: holes of proportional size at every scale
for name, point in (("line_family", (0.25, 0.0)), ("dense_cloud", (0.0, 0.0))):
    rep = porosity_check(example_scene(name), point, [0.2, 0.1, 0.05])
    print(f"porosity ratios for {name} at {point}: "
          + ", ".join(f"{r:.2f}" for r in rep.ratios) + f"  pass={rep.passed}")
