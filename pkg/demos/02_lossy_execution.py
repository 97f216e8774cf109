# %% [markdown]
# # Executing a plan with transport and lifetime loss
#
# The same plan executed under the measured 75 % transport efficiency and a
# 10 s lifetime. A failed transfer removes the atom, later moves that depend
# on it are skipped, and every atom then faces background loss over the cycle.

# %%
from atom_assembler import PhysicsParams, Workspace, execute_cycle, load_initial, plan_cycle, rng_stream, square_pattern

ws = Workspace(19, 19)
target = square_pattern(10, ws)
params = PhysicsParams()
rng = rng_stream(7)
occ = load_initial(ws, params, rng)
plan = plan_cycle(occ, target)
after, report = execute_cycle(occ, plan, params, rng, target)
print(f"{occ.count} atoms loaded, {len(plan)} moves planned")
print(report)

# %% [markdown]
# Fraction of 10x10 target filled over a handful of independent cycles.

# %%
for i in range(5):
    r = rng_stream(7, i + 1)
    occ = load_initial(ws, params, r)
    after, report = execute_cycle(occ, plan_cycle(occ, target), params, r, target)
    print(f"trial {i}: filling {report.filling_fraction:.2f}, lost in transport {report.lost_in_transport}")
