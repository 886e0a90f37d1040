from .types import Outcome, Judge, Game, GameDataset, BenchmarkRecord
from .tags import TagExpr, parse_tag_expr
from .io import load_games, save_games, load_benchmark_csv, game_from_dict, game_to_dict
from .benchmark import PairingStrategy, convert_benchmark
from .simulate import FeatureSampler, GroundTruth, make_truth, simulate_games
from .split import split, kfold, filter_games, concat

__all__ = [
    # tipos
    "Outcome", "Judge", "Game", "GameDataset", "BenchmarkRecord",
    # expresiones de tags
    "TagExpr", "parse_tag_expr",
    # io
    "load_games", "save_games", "load_benchmark_csv", "game_from_dict", "game_to_dict",
    # generación / conversión
    "PairingStrategy", "convert_benchmark", "FeatureSampler", "GroundTruth", "make_truth", "simulate_games",
    # particiones
    "split", "kfold", "filter_games", "concat",
]
