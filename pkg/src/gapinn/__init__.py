"""Physics-informed networks with point weighting and adversarial training."""

from ._alloc import tune_allocator

tune_allocator()

__version__ = "0.1.0"
