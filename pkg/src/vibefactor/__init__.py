"""Symmetric tensor factorization and fault-tolerant resource estimates for
vibrational and vibronic Hamiltonians."""

from importlib import resources

from .budget import ErrorBudget, make_budget, per_tensor_eps_f
from .costmodel import (CostReport, estimate, estimate_cp, estimate_tucker,
                        estimate_unfactorized, select_cost)
from .decomp import (CPFactors, CPOptions, TuckerFactors, cp_decompose, rank_for_error,
                     rank_sweep, tucker_decompose)
from .errors import *  # noqa: F401,F403
from .hamiltonian import (FactorizedModel, HamiltonianModel, factorize, one_norm,
                          synth_vibronic)
from .io import load_model, save_model
from .symtensor import SymTensor, symmetrize

__version__ = "0.1.0"


def bundled_model_path(name: str):
    """Path of a model shipped in ``vibefactor/data`` (``name`` without ``.json``)."""
    return resources.files(__package__) / "data" / f"{name}.json"
