"""Worst-case contact normal correction.

With the normal known only up to an angle ``eta``, the relative normal
motion seen along the least favourable normal is

    d_hat_n = d_n cos(eta) + ||d_t|| sin(eta)

(positive ``d_n`` separates, so the added term unloads the contact).
``||d_t||`` is replaced by a linear estimate in the motion weights that
never exceeds the true magnitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cone import FrictionConeState


@dataclass(frozen=True)
class RobustnessConfig:
    eta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta < math.pi / 2:
            raise ValueError("eta must lie in [0, pi/2)")


def motion_estimate_coefficients(cone: FrictionConeState) -> np.ndarray:
    """Per-weight coefficients ``kappa`` with ``||d_t|| ~ kappa . alpha``.

    The weights multiply unit edge directions, so ``sum(alpha)`` over a
    sector of angle ``delta`` ranges over ``[||d_t||, ||d_t|| / cos(delta/2)]``.
    Scaling by ``cos(delta/2)`` turns that into an underestimate which is
    exact on the sector bisector.  Each edge takes the half angle of its
    coarser neighbouring sector so the bound holds on both sides.
    """
    return cone.motion_scale


def tangential_motion_estimate(cone: FrictionConeState, alpha) -> float:
    return float(motion_estimate_coefficients(cone) @ np.asarray(alpha, dtype=float))


def effective_normal_gap_rows(contact, cone: FrictionConeState, eta: float):
    """Coefficients of ``d_hat_n`` as ``(coef_dn, coef_alpha)``.

    ``d_hat_n = coef_dn * d_n + coef_alpha . alpha``.  ``contact`` is
    accepted for symmetry with the encoder and is not otherwise needed.
    """
    RobustnessConfig(eta)
    if eta == 0.0:
        return 1.0, np.zeros(cone.num_edges)
    return math.cos(eta), math.sin(eta) * motion_estimate_coefficients(cone)


def effective_normal_gap(d_n: float, alpha, cone: FrictionConeState, eta: float) -> float:
    a, b = effective_normal_gap_rows(None, cone, eta)
    return a * d_n + float(b @ np.asarray(alpha, dtype=float))
