"""System (x) bath Hamiltonian models with bounded spectral norm.

Random matrices are drawn from the Philox counter-based generator keyed by
the model seed, so every model is bit-reproducible regardless of how a sweep
is scheduled across threads.  The system is the slow (leftmost) Kronecker
factor throughout.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .linalg import MAX_DIM, kron, require_hermitian, spectral_norm
from .operators import Operator, pauli

__all__ = ["HamiltonianModel", "random_model", "decompose", "model_descriptor", "model_from_descriptor"]

STRUCTURES = ("general", "pure_dephasing", "qdd_counterexample", "custom")
DEFAULT_BATH_DIM = 4
DEFAULT_NORM_BOUND = 1.0


@dataclass(frozen=True)
class HamiltonianModel:
    """A Hermitian H = H_S + H_B + H_SB on a sys_dim * bath_dim space."""

    structure: str
    sys_dim: int
    bath_dim: int
    norm_bound: float
    seed: int
    h_total: np.ndarray
    _eig: tuple = field(init=False, default=None, repr=False, compare=False)

    def __post_init__(self):
        h = require_hermitian(self.h_total)
        if h.shape[0] != self.sys_dim * self.bath_dim:
            raise PreconditionError(
                f"h_total dimension {h.shape[0]} != sys_dim*bath_dim "
                f"{self.sys_dim * self.bath_dim}"
            )
        if spectral_norm(h) > self.norm_bound + 1e-9:
            raise PreconditionError(
                f"spectral norm {spectral_norm(h):.6f} exceeds the declared "
                f"bound {self.norm_bound}"
            )
        object.__setattr__(self, "h_total", h)

    @property
    def dim(self) -> int:
        return self.sys_dim * self.bath_dim

    def eig(self):
        """Cached Hermitian eigendecomposition of h_total, reused across the
        many exponentials of a time sweep."""
        if self._eig is None:
            object.__setattr__(self, "_eig", np.linalg.eigh(self.h_total))
        return self._eig

    def propagator(self, t: float) -> np.ndarray:
        """exp(-i * h_total * t) from the cached eigendecomposition."""
        evals, evecs = self.eig()
        return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T

    def lift(self, op: Operator) -> np.ndarray:
        """System operator lifted to the full space as Omega (x) I_bath."""
        if op.acts_on != self.sys_dim:
            raise PreconditionError(
                f"operator {op.label!r} acts on dimension {op.acts_on}, "
                f"system dimension is {self.sys_dim}"
            )
        return kron(op.matrix, np.eye(self.bath_dim))


def _random_hermitian(rng: np.random.Generator, dim: int, norm: float) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    h = (a + a.conj().T) / 2
    s = spectral_norm(h)
    return h * (norm / s) if s > 0 else h


def random_model(
    structure: str,
    sys_dim: int,
    bath_dim: int = DEFAULT_BATH_DIM,
    norm_bound: float = DEFAULT_NORM_BOUND,
    seed: int = 0,
) -> HamiltonianModel:
    """Seeded random model of the requested structure.

    general: dense random Hermitian on the full space, rescaled to the bound.
    pure_dephasing: sum_l sigma_z^(l) (x) B_l + I (x) H_B, rescaled.
    qdd_counterexample: I (x) J0 + Z (x) J1 + X (x) J2 + ZX (x) iJ12 with
    independent random bath blocks of norm norm_bound/4 each.
    """
    if structure not in STRUCTURES or structure == "custom":
        raise PreconditionError(
            f"unknown model structure {structure!r}; choose from "
            f"{[s for s in STRUCTURES if s != 'custom']}"
        )
    dim = sys_dim * bath_dim
    if dim > MAX_DIM:
        raise PreconditionError(f"total dimension {dim} exceeds {MAX_DIM}")
    rng = np.random.Generator(np.random.Philox(key=seed))

    if structure == "general":
        h = _random_hermitian(rng, dim, norm_bound)
    elif structure == "pure_dephasing":
        n_qubits = int(math.log2(sys_dim))
        if 2**n_qubits != sys_dim:
            raise PreconditionError("pure_dephasing requires a 2^L system dimension")
        h = np.zeros((dim, dim), dtype=complex)
        for q in range(1, n_qubits + 1):
            b_q = _random_hermitian(rng, bath_dim, 1.0)
            h += kron(pauli("z", q, n_qubits).matrix, b_q)
        h += kron(np.eye(sys_dim), _random_hermitian(rng, bath_dim, 1.0))
        h *= norm_bound / spectral_norm(h)
    else:  # qdd_counterexample
        if sys_dim != 2:
            raise PreconditionError("qdd_counterexample is a single-qubit structure")
        z = pauli("z", 1, 1).matrix
        x = pauli("x", 1, 1).matrix
        quarter = norm_bound / 4
        j0 = _random_hermitian(rng, bath_dim, quarter)
        j1 = _random_hermitian(rng, bath_dim, quarter)
        j2 = _random_hermitian(rng, bath_dim, quarter)
        j12 = _random_hermitian(rng, bath_dim, quarter)
        h = (
            kron(np.eye(2), j0)
            + kron(z, j1)
            + kron(x, j2)
            + kron(z @ x, 1j * j12)
        )
    return HamiltonianModel(structure, sys_dim, bath_dim, norm_bound, seed, h)


def decompose(model: HamiltonianModel, omega: Operator):
    """Split H into the part commuting with Omega (x) I and the part
    anticommuting with it: C = (H + WHW)/2, A = (H - WHW)/2."""
    w = model.lift(omega)
    whw = w @ model.h_total @ w
    c_part = (model.h_total + whw) / 2
    a_part = (model.h_total - whw) / 2
    return c_part, a_part


def model_descriptor(model: HamiltonianModel) -> str:
    """JSON descriptor; matrices are never serialized, always regenerated."""
    return json.dumps(
        {
            "structure": model.structure,
            "sys_dim": model.sys_dim,
            "bath_dim": model.bath_dim,
            "norm_bound": model.norm_bound,
            "seed": model.seed,
        },
        indent=2,
    )


def model_from_descriptor(text: str) -> HamiltonianModel:
    doc = json.loads(text)
    return random_model(
        doc["structure"],
        doc["sys_dim"],
        doc["bath_dim"],
        doc["norm_bound"],
        doc["seed"],
    )
