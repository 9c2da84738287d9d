"""fluxon: an SFQ spiking-neuron design-flow toolkit."""

from .core import PHI0, PulseEvent, SpikeTrain, merge_trains

__version__ = "0.1.0"

__all__ = ["PHI0", "PulseEvent", "SpikeTrain", "merge_trains", "__version__"]
