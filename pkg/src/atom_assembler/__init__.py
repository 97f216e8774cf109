"""Planning and simulation of defect-free atom array assembly."""

__version__ = "0.1.0"

from .lattice import DomainError, GridPath, Site, Workspace, candidate_paths, manhattan
from .patterns import (PatternParseError, TargetPattern, gallery_pattern, parse_pattern,
                       serialize_pattern, square_pattern)
from .planner import (IllegalMoveError, Move, MovePlan, Occupancy, optimal_matching,
                      optimal_matching_cost, plan_cycle, plan_total_distance, replay)
from .physics import (ConfigError, CycleReport, PhysicsParams, execute_cycle, load_initial,
                      rng_stream, survival_probability)
from .engine import (AssemblyTrace, PlanningError, morph, perpetuate, plan_exchange,
                     reconstruct_repeatedly, run_assembly)
from .montecarlo import AggregateStats, ExperimentConfig, forecast_experiment, run_experiment
