"""Black-box systems: built-in benchmarks, disturbances, sampling, plugins."""
from .base import BenchmarkSystem, BlackBoxSystem, CountingSystem
from .benchmarks import BUILTIN_NAMES, builtin
from .distributions import DisturbanceDistribution
from .plugin import PluginSystem
from .sampling import draw_group_samples, draw_pair_samples

__all__ = [
    "BUILTIN_NAMES", "BenchmarkSystem", "BlackBoxSystem", "CountingSystem",
    "DisturbanceDistribution", "PluginSystem", "builtin", "draw_group_samples",
    "draw_pair_samples",
]
