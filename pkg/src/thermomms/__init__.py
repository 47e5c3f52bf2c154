"""Model-order reduction for coupled thermoelastic vibration."""

__version__ = "0.1.0"

from .assembly import SILICON, MaterialProps, assemble_system  # noqa: E402
from .mesh import PlateGeometry, build_dof_map, generate_plate_mesh  # noqa: E402
from .reduction import (reduce_mode_superposition, reduce_two_step,  # noqa: E402
                        reduce_two_step_second_order, reduce_uncoupled)
from .statespace import full_eigensolution, to_state_space  # noqa: E402

__all__ = ["SILICON", "MaterialProps", "assemble_system", "PlateGeometry", "build_dof_map",
           "generate_plate_mesh", "reduce_uncoupled", "reduce_two_step",
           "reduce_two_step_second_order", "reduce_mode_superposition", "full_eigensolution",
           "to_state_space"]
