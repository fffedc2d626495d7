"""Hot-loop backend, chosen once at import.

The compiled Cython module is used when it was built; otherwise the
pure-Python twins in ``_fallback`` take over. Set ``RRTPERC_BACKEND`` to
``python`` to force the fallback (``compiled`` makes a missing build an
error).
"""
import os

from . import _fallback

_wanted = os.environ.get("RRTPERC_BACKEND", "auto").lower()

if _wanted == "python":
    _impl = _fallback
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        if _wanted == "compiled":
            raise
        _impl = _fallback

BACKEND = "compiled" if _impl is not _fallback else "python"

site_labels = _impl.site_labels
bond_labels = _impl.bond_labels
piece_labels = _impl.piece_labels
census_chain = _impl.census_chain
gillespie = _impl.gillespie
yule_pair = _impl.yule_pair
grow_parents = _impl.grow_parents
bernoulli_marks = _impl.bernoulli_marks
leading_pieces = _impl.leading_pieces

__all__ = [
    "BACKEND",
    "site_labels",
    "bond_labels",
    "piece_labels",
    "census_chain",
    "gillespie",
    "yule_pair",
    "grow_parents",
    "bernoulli_marks",
    "leading_pieces",
]
