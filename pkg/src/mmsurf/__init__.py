"""mmsurf: molecular multiresolution surfaces from diffused solvent density.

A molecule's van der Waals, solvent-excluded, midway, and custom surfaces
are generated as level sets of a continuum solvent density diffused over a
Cartesian grid. The fast path advances the diffusion equation in a single
separable convolution step; an explicit finite-difference solver provides
the independent reference solution.
"""

from .errors import (
    ConfigError,
    DomainError,
    MmsurfError,
    NumericError,
    ParseError,
    ShapeError,
    StabilityError,
    UnknownElementError,
    ValidationError,
)
from .molecule import (
    Atom,
    Molecule,
    RadiusTable,
    assign_radii,
    bounding_box,
    default_margin,
    parse_pqr,
    parse_xyzr,
    write_xyzr,
)
from .grid import (
    GridSpec,
    ScalarGrid3,
    VoxelMask,
    build_grid,
    clamp_excluded,
    dump_grid,
    init_density,
    load_grid,
    rasterize_spheres,
    rasterize_spheres_naive,
)
from .lsek import (
    KernelParams,
    KernelWeights,
    evolve_3d,
    evolve_line,
    hermite_h_sequence,
    kernel_weights,
    sigma_t,
)
from .fd import (
    DiffusionField,
    FdParams,
    RadialProfile,
    cfl_limit,
    fd_solve,
    fd_step,
    radial_solve,
)
from .surface import (
    ContourSet,
    LevelContext,
    SurfaceRequest,
    TriangleMesh,
    marching_cubes,
    mesh_area,
    mesh_distance,
    mesh_is_closed,
    mesh_volume,
    resolve_level,
    slice_contours,
    trilinear,
    write_obj,
)

__version__ = "0.1.0"
