"""Staggered-grid solver for the full three-dimensional system."""
from .init import balance_residual, cell_background, column_profile, sample_bundle, well_prepared_init
from .kernels import BACKEND
from .solver import (EnergyLedger, Flow3DState, MACGrid, NS3DSolver, SolverFlags, ns3d_step,
                     run_to, with_dt)

__all__ = ["BACKEND", "EnergyLedger", "Flow3DState", "MACGrid", "NS3DSolver", "SolverFlags",
           "balance_residual", "cell_background", "column_profile", "ns3d_step", "run_to",
           "sample_bundle", "well_prepared_init", "with_dt"]
