"""Mean-field (product-state) overlap identities and the approximation's
validity horizon.

An N-boson two-mode product state parameterized by a qubit psi satisfies
<MF(psi)|MF(phi)> = (<psi|phi>)^N, so distinguishing mean-field states is
the same problem as distinguishing N product copies.  The optimal
copy-count for overlap 1 - eps is Theta(1/eps), while the quadratic
nonlinearity of strength g separates such states in time
(2/g) atanh(1 - eps); equating eps = 1/N gives the horizon

    t_star = (2/g) atanh(1 - 1/N),

which scales as (1/g) log N, and as (log N)/N for a homogeneous condensate
where g = U N at fixed interaction strength U.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .discrimination import gp_time_to_overlap


@dataclass(frozen=True)
class CondensateParams:
    """Atom count, interaction strength, and effective nonlinearity.

    When ``homogeneous`` is set, g is tied to U * n_atoms.
    """

    n_atoms: int
    U: float
    g: Optional[float] = None
    homogeneous: bool = True

    def __post_init__(self):
        if self.n_atoms < 2:
            raise ValueError("n_atoms must be >= 2")
        if self.U <= 0:
            raise ValueError("U must be > 0")
        if self.homogeneous:
            g = self.U * self.n_atoms
            if self.g is not None and not math.isclose(self.g, g, rel_tol=1e-12):
                raise ValueError("homogeneous condensate requires g = U * n_atoms")
            object.__setattr__(self, "g", g)
        elif self.g is None or self.g <= 0:
            raise ValueError("g must be > 0 for inhomogeneous parameters")


def meanfield_overlap(inner: complex, n_atoms: int) -> complex:
    """<MF(psi)|MF(phi)> = inner^n_atoms."""
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if abs(inner) > 1.0 + 1e-12:
        raise ValueError("|inner| must be <= 1")
    return complex(inner) ** n_atoms


def bosonic_overlap_bruteforce(psi: np.ndarray, phi: np.ndarray, n_atoms: int) -> complex:
    """Two-mode occupation-basis oracle for the product-state overlap.

    Expands (psi_0 a0+ + psi_1 a1+)^N |0> / sqrt(N!) over |k, N-k> with
    amplitudes sqrt(C(N, k)) psi_0^k psi_1^(N-k) and takes the inner
    product directly.  Intended for small N.
    """
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    if psi.shape != (2,) or phi.shape != (2,):
        raise ValueError("two-mode states required")
    ks = np.arange(n_atoms + 1)
    binom = np.array([math.comb(n_atoms, int(k)) for k in ks], dtype=float)
    amp_psi = np.sqrt(binom) * psi[0] ** ks * psi[1] ** (n_atoms - ks)
    amp_phi = np.sqrt(binom) * phi[0] ** ks * phi[1] ** (n_atoms - ks)
    return complex(np.vdot(amp_psi, amp_phi))


def gp_validity_time(p: CondensateParams, target_overlap: float = 0.0) -> float:
    """Horizon beyond which the mean-field description breaks down.

    With eps = 1/n_atoms (the optimal-measurement copy-count relation taken
    with constant 1), this is the discrimination time of the quadratic
    protocol from overlap 1 - eps to ``target_overlap``:

        t_star = (2/g) (atanh(1 - 1/n) - atanh(target_overlap)),

    i.e. (2/g) atanh(1 - 1/n) for the default target 0.
    """
    eps = 1.0 / p.n_atoms
    alpha0 = 2.0 * math.acos(1.0 - eps)
    return gp_time_to_overlap(p.g, alpha0, target_overlap)


def validity_scaling_constant(p: CondensateParams, target_overlap: float = 0.0) -> float:
    """t_star * n_atoms / ln(n_atoms): the homogeneous-condensate constant."""
    return gp_validity_time(p, target_overlap) * p.n_atoms / math.log(p.n_atoms)


def validity_csv(rows) -> str:
    out = ["N_atoms,g,t_star,t_star_times_N_over_logN"]
    for r in rows:
        out.append(f"{r['n_atoms']},{r['g']:.17g},{r['t_star']:.17g},"
                   f"{r['scaling']:.17g}")
    return "\n".join(out) + "\n"
