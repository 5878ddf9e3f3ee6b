"""Hybrid quantum-classical regression toolkit.

Subpackages cover a dense statevector simulator with symbolic circuit
programs, feature encodings, a layered entangling ansatz, analytic and
finite-difference gradients, circuit-quality descriptors, a truncated-Fock
photonic simulator, a tabular preprocessing pipeline, and a scikit-learn
style hybrid regressor with a command line front end.

The most common entry points are re-exported here; the full surface lives
in the submodules.
"""

from hqreg.ansatz import AnsatzSpec, rotation_layers, strongly_entangling_layers
from hqreg.descriptors import (
    DescriptorReport,
    ExpressibilityConfig,
    entangling_capability,
    expressibility,
    gradient_variance_scan,
    meyer_wallach_q,
)
from hqreg.encodings import EncodingSpec, encode_state
from hqreg.exceptions import (
    ContractError,
    DivergenceError,
    ResourceLimitError,
    SchemaError,
    TruncationError,
)
from hqreg.models import HybridRegressor, TrainConfig, TrainReport
from hqreg.pipeline import (
    PrincipalComponents,
    Standardizer,
    load_housing,
    load_table,
    train_test_split,
)
from hqreg.statevector import CircuitProgram, GateInstruction, Slot, StateVector

__version__ = "0.1.0"

__all__ = [
    "AnsatzSpec",
    "CircuitProgram",
    "ContractError",
    "DescriptorReport",
    "DivergenceError",
    "EncodingSpec",
    "ExpressibilityConfig",
    "GateInstruction",
    "HybridRegressor",
    "PrincipalComponents",
    "ResourceLimitError",
    "SchemaError",
    "Slot",
    "Standardizer",
    "StateVector",
    "TrainConfig",
    "TrainReport",
    "TruncationError",
    "encode_state",
    "entangling_capability",
    "expressibility",
    "gradient_variance_scan",
    "load_housing",
    "load_table",
    "meyer_wallach_q",
    "rotation_layers",
    "strongly_entangling_layers",
    "train_test_split",
    "__version__",
]
