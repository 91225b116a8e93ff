"""Graph-state generation with a quantum emitter and probabilistic fusion.

Modules
-------
graph       stabilizer graph states with single-qubit Clifford frames
redundant   redundantly encoded graphs (GHZ blocks per logical vertex)
fusion      fusion gates as graph rewrites, boosted fusion
emitter     generation plans and their compilers
oracle      dense statevector reference
analytics   closed-form success probabilities, rates and factory sizing
montecarlo  seeded loss simulation of plans
verify      oracle verification suite
cli         command-line front end
"""

from __future__ import annotations

from .analytics import (
    FactoryConfig,
    factory_sizing,
    factory_success,
    m_opt,
    p_boosted,
    p_cluster_2d,
    p_ring_encoded,
)
from .emitter import (
    GenerationPlan,
    compile_2d_layers,
    compile_encoded_ring,
    compile_ghz,
    compile_linear,
    compile_ring,
)
from .errors import GraphError, ImpossibleOutcomeError, PlanError, UnknownQubitError
from .fusion import FusionOutcome, boosted_fuse
from .graph import GraphState
from .montecarlo import LossModel, estimate
from .redundant import RedundantGraph

__version__ = "0.1.0"

__all__ = [
    "FactoryConfig",
    "FusionOutcome",
    "GenerationPlan",
    "GraphError",
    "GraphState",
    "ImpossibleOutcomeError",
    "LossModel",
    "PlanError",
    "RedundantGraph",
    "UnknownQubitError",
    "boosted_fuse",
    "compile_2d_layers",
    "compile_encoded_ring",
    "compile_ghz",
    "compile_linear",
    "compile_ring",
    "estimate",
    "factory_sizing",
    "factory_success",
    "m_opt",
    "p_boosted",
    "p_cluster_2d",
    "p_ring_encoded",
]
