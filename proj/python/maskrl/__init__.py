"""Action-masked reinforcement learning on operations-research control tasks.

The compiled core lives in the ``_maskrl`` extension; this package re-exports
its public surface. Every entry point takes the JSON experiment configuration
that the ``maskrl`` command-line tool reads.
"""

try:
    from . import _maskrl as _core  # installed layout: extension inside the package
except ImportError:
    import _maskrl as _core  # build tree: extension next to the package on sys.path

__version__ = _core.__version__

ConfigError = _core.ConfigError
MaskedDistribution = _core.MaskedDistribution
TrainResult = _core.TrainResult
PaintShop = _core.PaintShop
LoadManagement = _core.LoadManagement
Inventory = _core.Inventory

masked_distribution = _core.masked_distribution
canonical_config = _core.canonical_config
config_hash = _core.config_hash
generate_instance = _core.generate_instance
optimal_color_changes = _core.optimal_color_changes
optimal_inventory_cost = _core.optimal_inventory_cost
evaluate_greedy = _core.evaluate_greedy
evaluate_rule = _core.evaluate_rule
base_stock_cost = _core.base_stock_cost
train = _core.train

__all__ = [
    "ConfigError",
    "Inventory",
    "LoadManagement",
    "MaskedDistribution",
    "PaintShop",
    "TrainResult",
    "base_stock_cost",
    "canonical_config",
    "config_hash",
    "evaluate_greedy",
    "evaluate_rule",
    "generate_instance",
    "masked_distribution",
    "optimal_color_changes",
    "optimal_inventory_cost",
    "train",
]
