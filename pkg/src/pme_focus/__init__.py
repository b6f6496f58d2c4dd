"""Porous medium equation focusing laboratory.

Exact solutions (:mod:`pme_focus.exact`), a conservative radial solver
(:mod:`pme_focus.solver`), extraction of the focusing constant
(:mod:`pme_focus.asymptotics`) and the ``pme-focus`` command line
(:mod:`pme_focus.cli`).
"""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
