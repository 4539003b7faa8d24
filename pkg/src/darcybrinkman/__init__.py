"""Coupled Darcy-Stokes thin-channel solver and its Darcy-Brinkman limit.

Subpackages by role: grids (reference geometry and staggered layouts),
coefficients (physics and forcing), darcy/channel (operator assembly),
epsilon/limit (the two saddle problems), linalg (CG/Schur kernels and
inf-sup estimation), norms (discrete function-space norms), mms
(manufactured verification cases), sweep (the epsilon-convergence lab),
config/cli/report (driver and emission).
"""

__version__ = "0.1.0"
