"""
Composite Hilbert space QD (g, x, y) x mode1 x mode2 and the elementary
operator / superoperator builders used by every generator.

Operators are ``scipy.sparse.csr_matrix`` objects acting on the composite
space.  Superoperators act on density matrices vectorized by column stacking,
``vec(rho) = rho.flatten(order="F")``, so that ``vec(A rho B) = (B^T kron A)
vec(rho)``.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ConfigurationError", "SpaceLayout", "QD_LEVELS",
    "make_annihilation", "make_creation", "make_number", "make_qd_sigma",
    "qd_projector", "identity",
    "spre", "spost", "sprepost", "commutator_super",
    "lindblad_term", "lindblad_cross", "sandwich",
    "vec", "unvec", "apply_super",
]

QD_LEVELS = ("g", "x", "y")


class ConfigurationError(ValueError):
    """Invalid model configuration (cutoffs, ranges, unsupported options)."""


@dataclass(frozen=True)
class SpaceLayout:
    """Tensor layout QD (3 levels) x mode1 x mode2.

    ``cutoff1`` and ``cutoff2`` are the highest retained Fock numbers, i.e.
    mode ``i`` spans ``|0>, ..., |cutoff_i>``.
    """

    cutoff1: int
    cutoff2: int
    qd_dim: int = 3

    def __post_init__(self):
        if self.qd_dim != 3:
            raise ConfigurationError("the quantum dot has exactly 3 levels")
        for c in (self.cutoff1, self.cutoff2):
            if int(c) != c or c < 1:
                raise ConfigurationError(f"Fock cutoff must be an integer >= 1, got {c}")

    @property
    def dims(self):
        return (self.qd_dim, self.cutoff1 + 1, self.cutoff2 + 1)

    @property
    def dim(self):
        return self.qd_dim * (self.cutoff1 + 1) * (self.cutoff2 + 1)

    def index(self, level, n, m):
        """Flat basis index of ``|level, n, m>`` (level given as 'g'/'x'/'y' or 0..2)."""
        if isinstance(level, str):
            level = QD_LEVELS.index(level)
        _, d1, d2 = self.dims
        if not (0 <= n < d1 and 0 <= m < d2):
            raise IndexError(f"Fock state ({n}, {m}) outside truncation")
        return (level * d1 + n) * d2 + m

    def basis(self, level, n, m):
        """Ket ``|level, n, m>`` as a dense column vector."""
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index(level, n, m)] = 1.0
        return psi

    def photon_numbers(self):
        """Arrays ``(n, m)`` of the photon numbers of every basis state."""
        _, d1, d2 = self.dims
        levels, n, m = np.meshgrid(np.arange(3), np.arange(d1), np.arange(d2), indexing="ij")
        return n.ravel(), m.ravel()

    def qd_labels(self):
        _, d1, d2 = self.dims
        return np.repeat(np.arange(3), d1 * d2)

    def check(self, *ops):
        for op in ops:
            if op.shape != (self.dim, self.dim):
                raise ConfigurationError(
                    f"operator shape {op.shape} does not match layout dimension {self.dim}")


def _destroy(cutoff):
    return sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr")


def _embed(layout, qd=None, m1=None, m2=None):
    d0, d1, d2 = layout.dims
    qd = sp.identity(d0, format="csr") if qd is None else qd
    m1 = sp.identity(d1, format="csr") if m1 is None else m1
    m2 = sp.identity(d2, format="csr") if m2 is None else m2
    return sp.kron(sp.kron(qd, m1), m2, format="csr").astype(complex)


def identity(layout):
    return sp.identity(layout.dim, dtype=complex, format="csr")


def make_annihilation(layout, mode_index):
    """Truncated ladder operator ``a_i`` embedded in the composite space."""
    if mode_index == 1:
        return _embed(layout, m1=_destroy(layout.cutoff1))
    if mode_index == 2:
        return _embed(layout, m2=_destroy(layout.cutoff2))
    raise ConfigurationError(f"mode_index must be 1 or 2, got {mode_index}")


def make_creation(layout, mode_index):
    return make_annihilation(layout, mode_index).conj().T.tocsr()


def make_number(layout, mode_index):
    a = make_annihilation(layout, mode_index)
    return (a.conj().T @ a).tocsr()


def _qd_ket_bra(i, j):
    m = sp.lil_matrix((3, 3))
    m[QD_LEVELS.index(i), QD_LEVELS.index(j)] = 1.0
    return m.tocsr()


def make_qd_sigma(layout, which, sign):
    """QD transition operators: sigma_1^+ = |x><g|, sigma_2^+ = |y><g|.

    ``which`` is 'x'/'y' (or 1/2), ``sign`` is '+' or '-'.
    """
    level = {"x": "x", "y": "y", 1: "x", 2: "y"}.get(which)
    if level is None:
        raise ConfigurationError(f"which must be 'x' or 'y', got {which!r}")
    if sign == "+":
        return _embed(layout, qd=_qd_ket_bra(level, "g"))
    if sign == "-":
        return _embed(layout, qd=_qd_ket_bra("g", level))
    raise ConfigurationError(f"sign must be '+' or '-', got {sign!r}")


def qd_projector(layout, bra_ket):
    """``|i><j| (x) 1`` for ``bra_ket = (i, j)`` with labels in 'gxy'."""
    i, j = bra_ket
    return _embed(layout, qd=_qd_ket_bra(i, j))


# --- superoperators (column stacking) -------------------------------------

def vec(rho):
    return np.asarray(rho).flatten(order="F")


def unvec(v, dim=None):
    dim = int(round(np.sqrt(v.size))) if dim is None else dim
    return np.asarray(v).reshape((dim, dim), order="F")


def spre(a):
    """Superoperator of ``rho -> a rho``."""
    return sp.kron(sp.identity(a.shape[0], format="csr"), a, format="csr")


def spost(b):
    """Superoperator of ``rho -> rho b``."""
    return sp.kron(sp.csr_matrix(b).T, sp.identity(b.shape[0], format="csr"), format="csr")


def sprepost(a, b):
    """Superoperator of ``rho -> a rho b``."""
    return sp.kron(sp.csr_matrix(b).T, a, format="csr")


def commutator_super(h):
    """``rho -> -i [h, rho]``."""
    return (-1j * (spre(h) - spost(h))).tocsr()


def lindblad_term(op):
    """``L[O] rho = O^dag O rho - 2 O rho O^dag + rho O^dag O``.

    Generators subtract ``rate / 2 * L[O]``.
    """
    op = sp.csr_matrix(op)
    od = op.conj().T.tocsr()
    odo = (od @ op).tocsr()
    return (spre(odo) - 2 * sprepost(op, od) + spost(odo)).tocsr()


def lindblad_cross(op1, op2):
    """``L[O1, O2] rho = O2 O1 rho - 2 O1 rho O2 + rho O2 O1``.

    Trace-free for any pair of operators; ``L[O, O^dag]`` reduces to the
    single-operator form ``L[O]``.
    """
    op1 = sp.csr_matrix(op1)
    op2 = sp.csr_matrix(op2)
    if op1.shape != op2.shape:
        raise ConfigurationError("operators live on different layouts")
    o21 = (op2 @ op1).tocsr()
    return (spre(o21) - 2 * sprepost(op1, op2) + spost(o21)).tocsr()


def sandwich(left, right):
    """``rho -> left rho right``."""
    return sprepost(sp.csr_matrix(left), sp.csr_matrix(right))


def apply_super(superop, rho):
    dim = rho.shape[0]
    return unvec(superop @ vec(rho), dim)
