# %% [markdown]
# # Using the reservoir: perpetuation, reconstruction, morphing, exchange

# %%
import numpy as np

from atom_assembler import (Occupancy, PhysicsParams, Workspace, load_initial, morph, perpetuate, plan_exchange,
                            reconstruct_repeatedly, replay, rng_stream, run_assembly, square_pattern)
from atom_assembler.cli import exchange_setup
from atom_assembler.patterns import checkerboard, inverse

params = PhysicsParams()
ws = Workspace(19, 19)

# %% [markdown]
# Keeping a 5x5 cluster filled for 80 cycles in a row.

# %%
frames = [perpetuate(load_initial(ws, params, rng_stream(3, i)), square_pattern(5, ws), params, 80,
                     rng_stream(4, i))[0] for i in range(20)]
print("defect-free frames out of 80:", np.mean(frames), "+-", np.std(frames))

# %% [markdown]
# Emptying a central 3x3 cluster and rebuilding it from an 11x11 reservoir until
# the reservoir runs dry.

# %%
small = Workspace(11, 11)
counts = [reconstruct_repeatedly(load_initial(small, params, rng_stream(5, i)), square_pattern(3, small), params,
                                 rng_stream(6, i))[0] for i in range(50)]
print("reconstructions per loading:", np.bincount(counts))

# %% [markdown]
# Switching a checkerboard to its inverse.

# %%
a = checkerboard(8, ws)
b = inverse(a)
rng = rng_stream(8)
built = run_assembly(load_initial(ws, params, rng), a, params, 15, rng, stop_on_success=True)
if built.success_cycle is not None:
    trace = morph(built.final, a, b, params, rng)
    print("checkerboard built at cycle", built.success_cycle, "; inverse reached at cycle", trace.success_cycle)

# %% [markdown]
# Swapping two atoms between neighbouring 2x2 clusters, checked by lossless replay.

# %%
ca, cb, pairs = exchange_setup(ws)
occ = load_initial(ws, params, rng_stream(9))
occ = Occupancy(ws, occ.filled | ca.sites | cb.sites)
plan = plan_exchange(occ, ca, cb, pairs)
for m in plan:
    print(tuple(m.src), "->", tuple(m.dst))
print("occupancy unchanged after swap:", replay(occ, plan) == occ)
