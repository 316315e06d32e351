"""Lidar exploration with a Bayesian Hilbert map and a Pareto Monte Carlo tree search planner."""
from .bhm import BhmModel, GlobalMapDb, TrainingPoints, init_model, merge_into_db, predict, vi_update
from .config import ConfigError, ExplorationConfig, parse_config
from .explorer import Explorer, StepRecord, run, run_to_dir
from .features import build_hinge_grid, convex_hull, enlarge_hull, rbf_features, select_hinges
from .planner import PlannerParams, SearchResult, TrappedError, dominates, pareto_front, search
from .reward import OccupancyField, entropy_map, frontier_dynamics, reward_at
from .sim import MotionPrimitive, RobotPose, WorldMap, apply_action, collision_free, load_world, raycast, scan

__version__ = "0.1.0"

__all__ = [
    "BhmModel", "ConfigError", "ExplorationConfig", "Explorer", "GlobalMapDb", "MotionPrimitive",
    "OccupancyField", "PlannerParams", "RobotPose", "SearchResult", "StepRecord", "TrainingPoints",
    "TrappedError", "WorldMap", "apply_action", "build_hinge_grid", "collision_free", "convex_hull",
    "dominates", "enlarge_hull", "entropy_map", "frontier_dynamics", "init_model", "load_world",
    "merge_into_db", "parse_config", "pareto_front", "predict", "raycast", "rbf_features",
    "reward_at", "run", "run_to_dir", "scan", "search", "select_hinges", "vi_update",
]
