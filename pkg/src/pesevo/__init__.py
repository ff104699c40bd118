"""Plan-execute-summarize evolutionary search over island MAP-Elites archives."""

from .archive import Archive, FeatureDescriptor, FeatureDim, compute_features, discretize
from .config import ConfigError, RunConfig, config_from_dict, load_config
from .engine import CheckpointError, Engine, EventLog, RunResult, TaskError, read_events, run
from .islands import IslandState, MigrationPolicy, evolve_step, init_islands, migrate
from .memory import LineageContext, Solution, SolutionStore
from .pipeline import Candidate, EvalResult, OperatorContract, OperatorFailure, Plan, generate_offspring, verify
from .report import build_report, compare, inspect
from .selection import SelectionParams, adaptive_temperature, boltzmann_select, population_entropy
from .tasks import TaskSpec, circle_packing_task, code_task, rastrigin_task, synthetic_operators

__version__ = "0.1.0"
