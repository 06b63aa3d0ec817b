"""
Closed forms of gamma^i_km for the rotational families i = 2, 6 and the entropy family i = 4.

In the mhd regime every right eigenvector other than r2, r6 is radial,

    v = (x1, beta H2, beta H3, delta, eps H2, eps H3, x7),

while r2 and r6 are rotational, Rot(k, -1) and Rot(k, +1) with
Rot(a, b) = (0, a H3, -a H2, 0, b H3, -b H2, 0). The left rows l2, l6 read
Rot(p, q) as (p/k -+ q)/2 and annihilate radial vectors, which reduces every
contraction to the three scalars (beta/k, eps, delta/rho) of the radial partner.
"""

from __future__ import annotations

from typing import Dict, NamedTuple

from .core.exceptions import IndexContractError
from .eigensystem import Regime
from .state import PhysParams, State, speed_terms

CLOSED_FORM_FAMILIES = (2, 4, 6)

# sign of the field part of the rotational vectors
_ROTATION_SIGN = {2: -1.0, 6: 1.0}
_PARTNER = {2: 6, 6: 2}


class RadialShape(NamedTuple):
    beta_over_k: float  # beta / k, equal to Ca/Cf on the fast pair and Ca/Cs on the slow pair
    eps: float
    delta_over_rho: float


def radial_shapes(state: State, p: PhysParams) -> Dict[int, RadialShape]:
    """(beta/k, eps, delta/rho) for the radial eigenvectors r1, r3, r4, r5, r7."""
    t = speed_terms(state.phi, p, h1=Regime.MHD.longitudinal_field(p))
    a, f, s = float(t.a), float(t.f), float(t.s)
    fast = float(t.ca / t.cf)
    slow = float(t.ca / t.cs)
    return {
        1: RadialShape(fast, -1.0, a / f - 1.0),
        3: RadialShape(slow, -1.0, a / s - 1.0),
        4: RadialShape(0.0, 0.0, -1.0 / p.gamma),
        5: RadialShape(slow, 1.0, 1.0 - a / s),
        7: RadialShape(fast, 1.0, 1.0 - a / f),
    }


def closed_form_gamma(i: int, k: int, m: int, state: State, p: PhysParams) -> float:
    """
    gamma^i_km for i in {2, 4, 6} in the mhd regime.

    The expressions stay finite where H_perp vanishes, unlike the eigenvectors
    they come from.
    """
    if i not in CLOSED_FORM_FAMILIES:
        raise IndexContractError("Closed forms exist for families 2, 4 and 6", indices=(i, k, m), family_count=7)
    if not (1 <= k <= 7 and 1 <= m <= 7) or k == m or m == i:
        raise IndexContractError("gamma^i_km needs k != m and m != i", indices=(i, k, m), family_count=7)
    state.validate()
    if i == 4:
        return 0.0

    t = speed_terms(state.phi, p, h1=Regime.MHD.longitudinal_field(p))
    u1 = float(state.phi[0])
    cf, ca, cs = float(t.cf), float(t.ca), float(t.cs)
    lam = {1: u1 + cf, 2: u1 + ca, 3: u1 + cs, 4: u1, 5: u1 - cs, 6: u1 - ca, 7: u1 - cf}
    shapes = radial_shapes(state, p)
    own_sign = _ROTATION_SIGN[i]
    partner = _PARTNER[i]
    partner_sign = _ROTATION_SIGN[partner]

    if k == i:
        if m == partner:
            return 0.0
        v = shapes[m]
        inner = -v.delta_over_rho / 4.0 + v.eps / 2.0 - own_sign * v.beta_over_k / 2.0
        return -(lam[i] - lam[m]) * inner
    if k == partner:
        # m is radial here: m != i and m != k
        return -(lam[k] - lam[m]) * (-shapes[m].delta_over_rho / 4.0)
    if m == partner:
        v = shapes[k]
        return -(lam[k] - lam[m]) * partner_sign * (v.beta_over_k + own_sign * v.eps) / 2.0
    # both radial
    return 0.0
