# %% [markdown]
# # Cumulative success and filling fraction versus cluster size
#
# Monte Carlo over independent loadings; each trial runs 15 rearrangement
# cycles. Increase ``TRIALS`` for smoother curves.

# %%
from atom_assembler import ExperimentConfig, run_experiment

TRIALS = 300
for n in range(4, 11):
    s = run_experiment(ExperimentConfig(target=f"square:{n}", trials=TRIALS, seed=1))
    curve = " ".join(f"{v:.2f}" for v in s.cumulative_success[::3])
    print(f"{n:>2}x{n:<2} final {s.final_success:.3f}  max filling {s.mean_max_filling:.3f}"
          f" +- {s.std_max_filling:.3f}  curve(k=0,3,..,15) {curve}")
