# %% [markdown]
# # Large-grid forecast
#
# 1000-site target on a 50x50 grid with 80 % loading, 95 % transport and a
# 60 s lifetime. Background loss during imaging and overhead dominates here:
# compare the default timing with a variant where atoms are only lost while
# they are being moved.

# %%
from atom_assembler.montecarlo import FORECAST_PARAMS, forecast_config, run_experiment

TRIALS = 40
for label, params in [("default timing", FORECAST_PARAMS),
                      ("loss only during moves", FORECAST_PARAMS.replace(t_image=0.0, t_overhead=0.0))]:
    s = run_experiment(forecast_config(trials=TRIALS, params=params))
    print(f"{label:>24}: success {s.final_success:.2f}, mean max filling {s.mean_max_filling:.4f}, "
          f"moves/cycle {s.mean_moves_per_cycle:.0f}")
