"""The named verification battery: every identity as a reproducible check.

`run_suite` executes all registered checks on one (group, region) instance
and returns a structured report; `run_check` runs a single id.  Checks that
need a boundary, a full star, or a dense solve skip themselves with an
explicit reason instead of guessing.

The same battery backs the command line:

    qdouble verify --group Z2 --region free:3x3
    qdouble verify --group Z3 --region torus:2x2 --json --out report.json
"""

from qdouble import parse_group_spec, parse_region_spec, run_check, run_suite

# a full report on a fast instance
group = parse_group_spec("Z2")
region = parse_region_spec("torus:2x2")
report = run_suite(group, region, seed=7)
print(report.to_text())

# single ids on a free patch, where the boundary machinery engages
print("\nselected boundary checks on Z2 free:3x3:")
free = parse_region_spec("free:3x3")
for cid in (
    "boundary.charge-equality-eps",
    "boundary-loop.projection-mu",
    "energy.interior-boundary",
    "weights.single-excitation",
):
    res = run_check(cid, group, free)
    print(f"  {res.check_id:<32} residual {res.residual:.2e} < {res.threshold:.0e}"
          f"  [{res.wall_time:.2f}s]")
