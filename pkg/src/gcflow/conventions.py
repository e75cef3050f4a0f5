"""The global orientation and chart conventions, with a stable hash.

Every sign choice that the library fixes once and relies on everywhere is
recorded here; reports embed the hash so two runs can be compared for
convention drift as well as for numerical drift.
"""

from __future__ import annotations

import hashlib
import json

CONVENTIONS = {
    "r4_orientation": "(1, i, j, k) positive; 3-sphere oriented outward-normal-first",
    "hodge_star": "star(e01)=e23, star(e02)=e31, star(e03)=e12",
    "factor_split": (
        "first factor from (w + star w), second from (w - star w); calibrated so "
        "right-multiplication circle planes have varying first factor p*b*conj(p) "
        "and constant second factor b"
    ),
    "two_form_sign": (
        "kernel pairing <xi_H, eta_V> - <xi_V, eta_H>; the contact 2-form of the "
        "field 1-form matches it under the lift u -> (u, Du X)"
    ),
    "charts": "stereographic from pole k on both factors; second-factor chart conjugated",
    "factor_rotations": "first factor u -> m x u, second factor u -> -(n x u)",
    "witness": (
        "factors ordered by spiral class ((w, +jw) first); rotation sense is "
        "sign<c, b x a>"
    ),
    "ricci_normalization": "mean of the two transverse sectional curvatures (1 on the unit sphere)",
}


def conventions_hash() -> str:
    blob = json.dumps(CONVENTIONS, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]
