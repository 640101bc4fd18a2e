"""D/S/P temporal profiles of stream graphs via iterative weighted rich-clubs."""
__version__ = "0.1.0"

from .errors import (ConfigError, ConsistencyError, DomainError, MissingArtifactError,  # noqa: E402
                     ParseError, RichStreamError)
from .stream_graph import (ContactEvent, Snapshot, StreamGraph, WindowSpec,  # noqa: E402
                           instantaneous_degree, make_windows, parse_contacts, read_contacts,
                           snapshot)
from .topology import WindowedWeights, edge_weight_t, node_strength_t, window_weights  # noqa: E402
from .richclub import NullModelConfig, WindowPartition, itrich_window, label_instants  # noqa: E402
from .profiles import (ChannelWeights, DSPProfile, IndicatorTriple, indicators,  # noqa: E402
                       membership_rates, similarity, similarity_matrix)
from .clustering import kmeans, silhouette, sweep_k  # noqa: E402
from .synth import GroundTruth, SynthSpec, generate  # noqa: E402

__all__ = [
    "ChannelWeights", "ConfigError", "ConsistencyError", "ContactEvent", "DSPProfile",
    "DomainError", "GroundTruth", "IndicatorTriple", "MissingArtifactError", "NullModelConfig",
    "ParseError", "RichStreamError", "Snapshot", "StreamGraph", "SynthSpec", "WindowPartition",
    "WindowSpec", "WindowedWeights", "edge_weight_t", "generate", "indicators",
    "instantaneous_degree", "itrich_window", "kmeans", "label_instants", "make_windows",
    "membership_rates", "node_strength_t", "parse_contacts", "read_contacts", "silhouette",
    "similarity", "similarity_matrix", "snapshot", "sweep_k", "window_weights",
]
