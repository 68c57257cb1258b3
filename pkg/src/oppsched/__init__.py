"""Simulation and numerical-verification lab for 2-user opportunistic scheduling.

Subpackages by concern: channel model and utilities (``system``), region and
optimal policy math (``optimal``), scheduling policies (``policies``), the
converse gap/measure harness (``converse``), the Bernoulli estimation lab
(``estimation``), information metrics (``infometrics``), batch simulation
backends (``kernels``) and the command-line front end (``cli``).
"""

__version__ = "0.1.0"

from . import converse, estimation, infometrics, kernels, optimal, policies, system

__all__ = ["converse", "estimation", "infometrics", "kernels", "optimal",
           "policies", "system", "__version__"]
